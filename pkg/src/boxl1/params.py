"""Model selection and parameter validation shared by every module."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

__all__ = ["Model", "ModelParams", "DomainError"]


class DomainError(ValueError):
    """Arguments outside the region where a formula is defined."""


class Model(str, enum.Enum):
    BINARY = "binary"
    BOX = "box"

    @classmethod
    def parse(cls, value) -> "Model":
        if isinstance(value, Model):
            return value
        v = str(value).strip().lower()
        if v in ("bin", "binary"):
            return cls.BINARY
        if v == "box":
            return cls.BOX
        raise ValueError(f"unknown model {value!r}")


@dataclass(frozen=True)
class ModelParams:
    """A point (alpha, beta, mu) with alpha = m/n, beta = k/n.

    ``mu`` is the fraction of off-support entries equal to zero and is only
    used by the box model. Only generic ranges are checked here; each
    formula raises DomainError for its own stricter requirements.
    """

    alpha: float
    beta: float
    mu: float | None = None
    model: Model = Model.BINARY

    def __post_init__(self):
        object.__setattr__(self, "model", Model.parse(self.model))
        for name in ("alpha", "beta"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise DomainError(f"{name} must be finite")
        if not 0.0 < self.alpha < 1.0:
            raise DomainError(f"alpha={self.alpha} outside (0,1)")
        if not 0.0 < self.beta < self.alpha:
            raise DomainError(f"beta={self.beta} outside (0, alpha)")
        if self.model is Model.BOX:
            if self.mu is None or not math.isfinite(self.mu):
                raise DomainError("box model needs a finite mu")
            if not 0.5 < self.mu <= 1.0:
                raise DomainError(f"mu={self.mu} outside (1/2, 1]; mu = 1/2 is a pole")

    @classmethod
    def binary(cls, alpha: float, beta: float) -> "ModelParams":
        return cls(alpha, beta, None, Model.BINARY)

    @classmethod
    def box(cls, alpha: float, beta: float, mu: float) -> "ModelParams":
        return cls(alpha, beta, mu, Model.BOX)

    def with_alpha(self, alpha: float) -> "ModelParams":
        return ModelParams(alpha, self.beta, self.mu, self.model)
