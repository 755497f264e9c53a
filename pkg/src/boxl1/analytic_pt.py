"""Weak phase transitions of binary and box l1 recovery.

The curve is where xi(alpha, beta) = 1, with y = erf_inv(arg) and

    binary: xi = (1 - 2 beta) e^{-y^2} / (2 sqrt(pi) alpha y),
            arg = (1 - 2 alpha) / (1 - 2 beta)
    box:    xi = (2 mu - 1)(1 - beta) e^{-y^2} / (2 sqrt(pi) alpha y),
            arg = (1 + beta - 2 alpha) / ((2 mu - 1)(1 - beta))

xi > 1 means alpha sits above the curve (recovery succeeds).

An independent route compares sqrt(alpha) with the minimised Gaussian
width of the pattern's sign cone, see :func:`expected_width_gap`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterable

from .params import DomainError, Model, ModelParams
from .search import BracketError, find_root, log_grid, scan_brackets
from .specfun import SQRT_PI, erf_inv, erfc

__all__ = [
    "PtPoint",
    "PtCurve",
    "xi_bin",
    "xi_box",
    "xi",
    "pt_beta",
    "pt_alpha",
    "pt_curve",
    "width_squared",
    "expected_width_gap",
]

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
_EDGE = 1e-12


@dataclass(frozen=True)
class PtPoint:
    alpha: float
    beta: float
    mu: float | None = None


class PtCurve(list):
    """List of PtPoint; ``skipped`` holds (alpha, reason) for failed points."""

    def __init__(self, points=(), skipped=()):
        super().__init__(points)
        self.skipped = list(skipped)


def _reduced(scale: float, alpha: float, y: float) -> float:
    return scale * math.exp(-y * y) / (2.0 * SQRT_PI * alpha * y)


def xi_bin(alpha: float, beta: float) -> float:
    if not (0.0 < beta < alpha < 0.5):
        raise DomainError(f"binary PT needs 0 < beta < alpha < 1/2, got alpha={alpha}, beta={beta}")
    arg = (1.0 - 2.0 * alpha) / (1.0 - 2.0 * beta)
    return _reduced(1.0 - 2.0 * beta, alpha, erf_inv(arg))


def xi_box(alpha: float, beta: float, mu: float) -> float:
    """Box PT ratio.

    When the erf_inv argument is in (-1, 0] the minimising width offset
    sits on its boundary nu = 0, the literal formula changes sign, and the
    point lies strictly on the success side; ``inf`` is returned there.
    """
    if not (0.5 < mu <= 1.0):
        raise DomainError(f"box PT needs 1/2 < mu <= 1, got mu={mu}")
    if not (0.0 < beta < 1.0 and 0.0 < alpha < 1.0):
        raise DomainError("alpha and beta must lie in (0,1)")
    scale = (2.0 * mu - 1.0) * (1.0 - beta)
    arg = (1.0 + beta - 2.0 * alpha) / scale
    if not (-1.0 < arg < 1.0):
        raise DomainError(f"box PT argument {arg} outside (-1,1)")
    if arg <= 0.0:
        return math.inf
    return _reduced(scale, alpha, erf_inv(arg))


def xi(params: ModelParams) -> float:
    if params.model is Model.BINARY:
        return xi_bin(params.alpha, params.beta)
    return xi_box(params.alpha, params.beta, params.mu)


def _beta_interval(alpha: float, model: Model, mu: float | None) -> tuple[float, float]:
    if model is Model.BINARY:
        if not 0.0 < alpha < 0.5:
            raise DomainError(f"binary PT needs alpha in (0, 1/2), got {alpha}")
        return 0.0, alpha
    # arg in (0,1) <=> 2 alpha - 1 < beta < 1 - (1 - alpha)/mu
    lo = max(0.0, 2.0 * alpha - 1.0)
    hi = min(alpha, 1.0 - (1.0 - alpha) / mu)
    if not lo < hi:
        raise DomainError(f"no box PT beta for alpha={alpha}, mu={mu}")
    return lo, hi


def _alpha_interval(beta: float, model: Model, mu: float | None) -> tuple[float, float]:
    if model is Model.BINARY:
        if not 0.0 < beta < 0.5:
            raise DomainError(f"binary PT needs beta in (0, 1/2), got {beta}")
        return beta, 0.5
    lo = max(beta, 1.0 - mu * (1.0 - beta))
    hi = min(1.0, (1.0 + beta) / 2.0)
    if not lo < hi:
        raise DomainError(f"no box PT alpha for beta={beta}, mu={mu}")
    return lo, hi


def _solve_on(g, lo: float, hi: float, what: str) -> float:
    """Root of g on (lo, hi): 64 log-spaced candidates from each end."""
    width = hi - lo
    offs = log_grid(_EDGE * max(1.0, width), width / 2.0, 64)
    grid = [lo + o for o in offs] + [hi - o for o in reversed(offs)]

    def safe(t):
        try:
            v = g(t)
        except DomainError:
            return None
        return v if not math.isnan(v) else None

    brackets = scan_brackets(safe, grid)
    if not brackets:
        raise BracketError(f"no sign change while solving for {what}")
    a, b = brackets[0]
    return find_root(g, a, b)


def _check_mu(model: Model, mu):
    if model is Model.BOX and (mu is None or not 0.5 < mu <= 1.0):
        raise DomainError(f"box PT needs 1/2 < mu <= 1, got {mu}")


def pt_beta(alpha: float, model=Model.BINARY, mu: float | None = None) -> float:
    """The beta on the PT curve for a given alpha."""
    model = Model.parse(model)
    _check_mu(model, mu)
    lo, hi = _beta_interval(alpha, model, mu)
    if model is Model.BINARY:
        return _solve_on(lambda b: xi_bin(alpha, b) - 1.0, lo, hi, "beta")
    return _solve_on(lambda b: xi_box(alpha, b, mu) - 1.0, lo, hi, "beta")


def pt_alpha(beta: float, model=Model.BINARY, mu: float | None = None) -> float:
    """The alpha on the PT curve for a given beta."""
    model = Model.parse(model)
    _check_mu(model, mu)
    lo, hi = _alpha_interval(beta, model, mu)
    if model is Model.BINARY:
        return _solve_on(lambda a: xi_bin(a, beta) - 1.0, lo, hi, "alpha")
    return _solve_on(lambda a: xi_box(a, beta, mu) - 1.0, lo, hi, "alpha")


def pt_curve(model, mu: float | None, alpha_grid: Iterable[float]) -> PtCurve:
    """PT points for each alpha; failing points are skipped with a warning."""
    model = Model.parse(model)
    pts, skipped = [], []
    for a in alpha_grid:
        try:
            pts.append(PtPoint(float(a), pt_beta(float(a), model, mu),
                               mu if model is Model.BOX else None))
        except (DomainError, BracketError) as exc:
            skipped.append((float(a), str(exc)))
            warnings.warn(f"pt_curve: skipped alpha={a}: {exc}", RuntimeWarning, stacklevel=2)
    return PtCurve(pts, skipped)


# Gaussian second moments, h ~ N(0,1)

def _tail_terms(nu: float) -> tuple[float, float, float]:
    q = 0.5 * erfc(nu / _SQRT2)  # P(h > nu)
    phi_c = 0.5 * erfc(-nu / _SQRT2)  # P(h < nu)
    pdf = _INV_SQRT_2PI * math.exp(-0.5 * nu * nu)
    return q, phi_c, pdf


def _pos_part_sq_minus(nu: float) -> float:
    """E[max(h - nu, 0)^2]."""
    q, _, pdf = _tail_terms(nu)
    return (1.0 + nu * nu) * q - nu * pdf


def _pos_part_sq_plus(nu: float) -> float:
    """E[max(h + nu, 0)^2]."""
    _, phi_c, pdf = _tail_terms(nu)
    return (1.0 + nu * nu) * phi_c + nu * pdf


def _weights(params: ModelParams) -> tuple[float, float, float]:
    """Weights of the (h - nu)_+^2, (h + nu)_+^2 and (h + nu)^2 terms."""
    b = params.beta
    if params.model is Model.BINARY:
        return 1.0 - b, b, 0.0
    mu = params.mu
    return mu * (1.0 - b), (1.0 - mu) * (1.0 - b), b


def width_squared(params: ModelParams, nu: float) -> float:
    """Expected squared distance functional whose minimum over nu >= 0 is
    the squared normalised Gaussian width of the sign cone."""
    w1, w2, w3 = _weights(params)
    return w1 * _pos_part_sq_minus(nu) + w2 * _pos_part_sq_plus(nu) + w3 * (1.0 + nu * nu)


def _width_slope(params: ModelParams, nu: float) -> float:
    w1, w2, w3 = _weights(params)
    q, phi_c, pdf = _tail_terms(nu)
    return 2.0 * (w1 * (nu * q - pdf) + w2 * (nu * phi_c + pdf) + w3 * nu)


def optimal_offset(params: ModelParams) -> float:
    """argmin over nu >= 0 of width_squared; the functional is convex."""
    if _width_slope(params, 0.0) >= 0.0:
        return 0.0
    hi = 1.0
    while _width_slope(params, hi) < 0.0:
        hi *= 2.0
        if hi > 1e3:
            raise BracketError("width offset search diverged")
    return find_root(lambda v: _width_slope(params, v), 0.0, hi)


def expected_width_gap(alpha: float, beta: float, mu: float | None = None, model=Model.BINARY) -> float:
    """min_nu sqrt(width_squared) - sqrt(alpha): zero on the PT curve,
    negative above it."""
    params = ModelParams(alpha, beta, mu, Model.parse(model))
    nu = optimal_offset(params)
    return math.sqrt(width_squared(params, nu)) - math.sqrt(alpha)
