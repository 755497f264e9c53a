"""Scalar error-function family.

erf and erfc come from the C library through :mod:`math`. erfcx and the
inverse error function are computed here: every ``y e^{y^2} erfc(+-y)``
group in the LDP formulas is routed through :func:`erfcx`, which stays finite
where the literal product would overflow.
"""

from __future__ import annotations

import math

from .params import DomainError

__all__ = ["erf", "erfc", "erfcx", "erf_inv", "SQRT_PI"]

SQRT_PI = math.sqrt(math.pi)
_TWO_OVER_SQRT_PI = 2.0 / SQRT_PI
_SPLIT = 134217729.0  # 2**27 + 1, Veltkamp splitting constant


def erf(x: float) -> float:
    return math.erf(x)


def erfc(x: float) -> float:
    return math.erfc(x)


def _exp_square(x: float) -> float:
    """exp(x*x) without the rounding error of forming x*x first."""
    t = _SPLIT * x
    hi = t - (t - x)
    lo = x - hi
    # hi*hi is exact; the remainder is tiny compared to it
    return math.exp(hi * hi) * math.exp(lo * (2.0 * hi + lo))


def _erfcx_cf(x: float) -> float:
    # Laplace continued fraction, converges fast for large x
    acc = x
    for k in range(60, 0, -1):
        acc = x + (k / 2.0) / acc
    return 1.0 / (SQRT_PI * acc)


def erfcx(x: float) -> float:
    """Scaled complementary error function e^{x^2} erfc(x)."""
    if math.isnan(x):
        raise DomainError("erfcx of NaN")
    if x < 0.0:
        if x * x > 708.0:
            return math.inf
        return 2.0 * _exp_square(x) - erfcx(-x)
    if x < 25.0:
        return _exp_square(x) * math.erfc(x)
    return _erfcx_cf(x)


def _erf_inv_guess(p: float) -> float:
    # single precision log-polynomial starting point
    w = -math.log((1.0 - p) * (1.0 + p))
    if w < 5.0:
        w -= 2.5
        c = (2.81022636e-08, 3.43273939e-07, -3.5233877e-06, -4.39150654e-06,
             0.00021858087, -0.00125372503, -0.00417768164, 0.246640727, 1.50140941)
    else:
        w = math.sqrt(w) - 3.0
        c = (-0.000200214257, 0.000100950558, 0.00134934322, -0.00367342844,
             0.00573950773, -0.0076224613, 0.00943887047, 1.00167406, 2.83297682)
    r = c[0]
    for coef in c[1:]:
        r = coef + r * w
    return r * p


def erf_inv(p: float) -> float:
    """Inverse of erf on (-1, 1), polished by Halley steps on erf.

    For |p| > 1/2 the residual is formed as (1 - p) - erfc(x), which keeps
    full relative accuracy in the tail.
    """
    if not (-1.0 < p < 1.0):
        raise DomainError(f"erf_inv needs |p| < 1, got {p}")
    if p == 0.0:
        return 0.0
    sign = 1.0 if p > 0 else -1.0
    q = abs(p)
    x = _erf_inv_guess(q)
    tail = q > 0.5
    comp = 1.0 - q
    for _ in range(8):
        if tail:
            f = comp - math.erfc(x)
        else:
            f = math.erf(x) - q
        fp = _TWO_OVER_SQRT_PI * math.exp(-x * x)
        step = f / (fp + x * f)
        x -= step
        if abs(step) <= 1e-17 * max(1.0, abs(x)):
            break
    return sign * x
