"""Numeric optimisation oracles for the LDP rate.

Two independent routes are provided, neither of which uses the closed form
in :mod:`boxl1.ldp_analytic`:

* the probabilistic objective zeta(c3, nu, A0), optimised by nested 1-D
  Brent searches,
* the geometric objective psi_com + psi_int + psi_ext, a max over gamma_g of
  a min over y_i plus a max over y_e, each axis searched by golden section.

Both are derivative-free. :func:`geom_gradient` gives the analytic partial
derivatives of the geometric objective so first-order conditions can be
checked at a reported optimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .params import DomainError, Model, ModelParams
from .search import brent_minimize, golden_section, parabolic_polish
from .specfun import SQRT_PI, erf, erf_inv, erfc, erfcx

__all__ = [
    "entropy",
    "zeta_prob",
    "ZetaProbPoint",
    "minimize_zeta_prob",
    "ZetaGeomValue",
    "zeta_geom",
    "GeometryParts",
    "solve_geom",
    "geom_gradient",
    "gamma_g_bounds",
    "y_e_from_cone",
]

_SQRT2 = math.sqrt(2.0)
_LOG2 = math.log(2.0)
_TOL = 1e-10

# search boxes; generous compared with every optimum met on 0.05 < beta < alpha < 0.7
_C3_MAX = 8.0
_NU_MAX = 8.0
_A0_MIN = 0.02
_A0_MAX = 64.0
_A0_GAP = 1e-9
_Y_MAX = 6.0
# multi-start points of the outer searches; the optima crowd towards
# c3 = 0 and A0 = 1 near the transition, hence the geometric spacing
_A0_STARTS = [0.15, 0.4, 0.65, 0.85, 0.97]
_C3_STARTS = [-2.5, -1.0, -0.4, -0.15, -0.05]
_EDGE = 1e-12


def entropy(x: float) -> float:
    """H(x) = x log x + (1 - x) log(1 - x), with H(0) = H(1) = 0."""
    if not (0.0 <= x <= 1.0):
        raise DomainError(f"entropy needs x in [0, 1], got {x}")
    out = 0.0
    if x > 0.0:
        out += x * math.log(x)
    if x < 1.0:
        out += (1.0 - x) * math.log1p(-x)
    return out


# probabilistic route

def _log_weights(nu: float, a0: float) -> tuple[float, float, float]:
    """log w1, log w2, log w3 at (nu, A0) without overflow."""
    t = nu / (_SQRT2 * a0)
    expo = (1.0 - a0 * a0) * nu * nu / (2.0 * a0 * a0)
    log_a0 = math.log(a0)
    # w1 = (erfcx(t) e^{-nu^2/2} / A0 + erf(nu/sqrt2) + 1) / 2
    w1 = 0.5 * (erfcx(t) * math.exp(-0.5 * nu * nu) / a0 + erf(nu / _SQRT2) + 1.0)
    # w2 = (erfc(-t) e^{expo} / A0 + erfc(nu/sqrt2)) / 2, summed in log space
    la = math.log(erfc(-t)) + expo - log_a0
    tail = erfc(nu / _SQRT2)
    lb = math.log(tail) if tail > 0.0 else -math.inf
    lw2 = float(np.logaddexp(la, lb)) - _LOG2
    return math.log(w1), lw2, expo - log_a0


def _sphere_part(alpha: float, c3: float) -> float:
    """-c3^2/2 + I_sph(c3), with I_sph in its optimised closed form over gamma."""
    g_hat = (c3 - math.sqrt(c3 * c3 + 4.0 * alpha)) / 4.0
    return -0.5 * c3 * c3 + g_hat * c3 - 0.5 * alpha * math.log(1.0 - c3 / (2.0 * g_hat))


def _c3_part(alpha: float, c3: float, a0: float) -> float:
    if c3 == 0.0:
        return 0.0
    d = 1.0 - a0 * a0
    if d == 0.0:
        raise DomainError("A0 = 1 with c3 != 0 is a pole")
    return _sphere_part(alpha, c3) + c3 * c3 / (2.0 * d)


def _l_part(params: ModelParams, nu: float, a0: float) -> float:
    l1, l2, l3 = _log_weights(nu, a0)
    b = params.beta
    if params.model is Model.BINARY:
        return (1.0 - b) * l1 + b * l2
    mu = params.mu
    return mu * (1.0 - b) * l1 + (1.0 - mu) * (1.0 - b) * l2 + b * l3


def zeta_prob(params: ModelParams, c3: float, nu: float, a0: float) -> float:
    """The probabilistic objective zeta(c3, nu, A0).

    The same expression serves both tails: c3 >= 0 with A0 < 1 for the
    upper tail, c3 <= 0 with A0 > 1 for the lower one.
    """
    if not (a0 > 0.0 and math.isfinite(a0)):
        raise DomainError(f"A0 must be positive and finite, got {a0}")
    if not nu >= 0.0:
        raise DomainError(f"nu must be non-negative, got {nu}")
    if (c3 > 0.0 and a0 >= 1.0) or (c3 < 0.0 and a0 <= 1.0):
        raise DomainError(f"A0={a0} inconsistent with the tail of c3={c3}")
    return _c3_part(params.alpha, c3, a0) + _l_part(params, nu, a0)


@dataclass(frozen=True)
class ZetaProbPoint:
    c3: float
    nu: float
    a0: float
    value: float
    tail: str = "upper"
    converged: bool = True


def _coarse_then_brent(f: Callable[[float], float], lo: float, hi: float,
                       starts: list[float], maximize: bool = False) -> tuple[float, float]:
    """Evaluate f at the increasing interior ``starts``, then run Brent on
    the interval around the best one."""
    xs = list(starts)
    vals = [f(x) for x in xs]
    pick = max if maximize else min
    i = vals.index(pick(vals))
    a = lo if i == 0 else xs[i - 1]
    b = hi if i == len(xs) - 1 else xs[i + 1]
    x, v = brent_minimize(f, a, b, tol=_TOL, maximize=maximize)
    # keep the coarse point if Brent's local answer is worse
    if (v > vals[i]) if not maximize else (v < vals[i]):
        return xs[i], vals[i]
    return x, v


def _upper_tail(params: ModelParams) -> ZetaProbPoint:
    # zeta separates into a (c3, A0) part and a (nu, A0) part
    alpha = params.alpha

    def best_c3(a0):
        return brent_minimize(lambda c: _c3_part(alpha, c, a0), 0.0, _C3_MAX, tol=_TOL)

    def best_nu(a0):
        return brent_minimize(lambda v: _l_part(params, v, a0), 0.0, _NU_MAX, tol=_TOL)

    def outer(a0):
        return best_c3(a0)[1] + best_nu(a0)[1]

    a0, value = _coarse_then_brent(outer, _A0_MIN, 1.0 - _A0_GAP, _A0_STARTS)
    c3, nu = best_c3(a0)[0], best_nu(a0)[0]
    ok = _A0_MIN + 1e-6 < a0 and c3 < _C3_MAX - 1e-6 and nu < _NU_MAX - 1e-6
    return ZetaProbPoint(c3, nu, a0, value, "upper", ok)


def _lower_tail(params: ModelParams) -> ZetaProbPoint:
    alpha = params.alpha

    def best_nu(a0):
        return brent_minimize(lambda v: _l_part(params, v, a0), 0.0, _NU_MAX, tol=_TOL, maximize=True)

    def inner(c3):
        return brent_minimize(lambda a: _c3_part(alpha, c3, a) + best_nu(a)[1],
                              1.0 + _A0_GAP, _A0_MAX, tol=_TOL, maximize=True)

    c3, value = _coarse_then_brent(lambda c: inner(c)[1], -_C3_MAX, 0.0, _C3_STARTS)
    a0 = inner(c3)[0]
    nu = best_nu(a0)[0]
    ok = c3 > -_C3_MAX + 1e-6 and a0 < _A0_MAX - 1e-6 and nu < _NU_MAX - 1e-6
    return ZetaProbPoint(c3, nu, a0, value, "lower", ok)


def minimize_zeta_prob(params: ModelParams) -> ZetaProbPoint:
    """Optimise zeta numerically over both tails; the more negative wins.

    Upper tail: min over c3 >= 0, nu >= 0, A0 < 1.
    Lower tail: min over c3 <= 0 of max over nu >= 0, A0 > 1.
    Away from the transition the losing tail sits at its trivial value 0.
    """
    up = _upper_tail(params)
    lo = _lower_tail(params)
    return up if up.value <= lo.value else lo


# geometric route

def gamma_g_bounds(params: ModelParams) -> tuple[float, float]:
    """Open interval of admissible gamma_g (every entropy argument in [0, 1])."""
    a, b = params.alpha, params.beta
    if params.model is Model.BINARY:
        lo, hi = 0.0, min(1.0 - a, b)
    else:
        p, q = params.mu * (1.0 - b), (1.0 - params.mu) * (1.0 - b)
        lo, hi = max(0.0, 1.0 - a - p), min(1.0 - a, q)
    if not lo < hi:
        raise DomainError(f"empty gamma_g interval at {params}")
    return lo, hi


def _split(params: ModelParams) -> tuple[float, float]:
    """Weights (p, q) of the two off-support groups."""
    b = params.beta
    if params.model is Model.BINARY:
        return 1.0 - b, b
    return params.mu * (1.0 - b), (1.0 - params.mu) * (1.0 - b)


def _coeffs(params: ModelParams, gg: float) -> tuple[float, float, float]:
    p, q = _split(params)
    out = 1.0 - params.alpha - gg
    return out, p - out, q - gg


def _psi_com(params: ModelParams, gg: float) -> float:
    p, q = _split(params)
    out = 1.0 - params.alpha - gg
    return -p * entropy(out / p) - q * entropy((q - gg) / q)


def _int_integrand(params: ModelParams, gg: float, y: float) -> float:
    _, ci, cm = _coeffs(params, gg)
    return params.alpha * y * y + ci * math.log(erfc(y)) + cm * math.log(erfc(-y)) - (ci + cm) * _LOG2


def _ext_integrand(params: ModelParams, gg: float, y: float) -> float:
    out, _, _ = _coeffs(params, gg)
    a = params.alpha
    return -a * y * y + out * math.log(erfc(-y)) + gg * math.log(erfc(y)) - (1.0 - a) * _LOG2


class ZetaGeomValue(NamedTuple):
    value: float
    psi_com: float
    psi_int: float
    psi_ext: float


def zeta_geom(params: ModelParams, gamma_g: float, y_e: float, y_i: float) -> ZetaGeomValue:
    """psi_com plus the psi_int and psi_ext integrands at a given point."""
    lo, hi = gamma_g_bounds(params)
    if not lo < gamma_g < hi:
        raise DomainError(f"gamma_g={gamma_g} outside ({lo}, {hi})")
    if y_e < 0.0 or y_i < 0.0:
        raise DomainError("y_e and y_i must be non-negative")
    com = _psi_com(params, gamma_g)
    pi = _int_integrand(params, gamma_g, y_i)
    pe = _ext_integrand(params, gamma_g, y_e)
    return ZetaGeomValue(com + pi + pe, com, pi, pe)


@dataclass(frozen=True)
class GeometryParts:
    gamma_g: float
    y_i: float
    y_e: float
    psi_com: float
    psi_int: float
    psi_ext: float
    psi_net: float

    @property
    def psi_net_flipped(self) -> float:
        """psi_com + psi_int - psi_ext, the alternative lower-tail sign."""
        return self.psi_com + self.psi_int - self.psi_ext


def _argext(f: Callable[[float], float], lo: float, hi: float, maximize: bool) -> float:
    x, _ = golden_section(f, lo, hi, tol=_TOL, maximize=maximize)
    # the second, shorter step shrinks the h^2 bias where curvature is steep
    for h in (1e-5, 1e-7):
        x = parabolic_polish(f, x, h=h, lo=lo, hi=hi)
    return x


def _inner(params: ModelParams, gg: float) -> tuple[float, float, float, float]:
    y_i = _argext(lambda y: _int_integrand(params, gg, y), 0.0, _Y_MAX, maximize=False)
    y_e = _argext(lambda y: _ext_integrand(params, gg, y), 0.0, _Y_MAX, maximize=True)
    return y_i, _int_integrand(params, gg, y_i), y_e, _ext_integrand(params, gg, y_e)


def solve_geom(params: ModelParams) -> GeometryParts:
    """max over gamma_g of [psi_com + min_{y_i} int + max_{y_e} ext]."""
    lo, hi = gamma_g_bounds(params)
    lo, hi = lo + _EDGE, hi - _EDGE

    def net(gg):
        _, pi, _, pe = _inner(params, gg)
        return _psi_com(params, gg) + pi + pe

    gg = _argext(net, lo, hi, maximize=True)
    y_i, pi, y_e, pe = _inner(params, gg)
    com = _psi_com(params, gg)
    return GeometryParts(gg, y_i, y_e, com, pi, pe, com + pi + pe)


def geom_gradient(params: ModelParams, gamma_g: float, y_e: float, y_i: float) -> tuple[float, float, float]:
    """Analytic (d/dgamma_g, d/dy_e, d/dy_i) of the geometric objective."""
    out, ci, cm = _coeffs(params, gamma_g)
    a = params.alpha
    ei_p, ei_m = erfc(y_i), erfc(-y_i)
    ee_p, ee_m = erfc(y_e), erfc(-y_e)
    d_gg = (math.log(out / ci) + math.log(cm / gamma_g)
            + math.log(ei_p * ee_p / (ei_m * ee_m)))
    # 2/sqrt(pi) e^{-y^2} / erfc(y) = 2 / (sqrt(pi) erfcx(y))
    k_i = math.exp(-y_i * y_i) * 2.0 / SQRT_PI
    d_yi = 2.0 * a * y_i - ci * 2.0 / (SQRT_PI * erfcx(y_i)) + cm * k_i / ei_m
    k_e = math.exp(-y_e * y_e) * 2.0 / SQRT_PI
    d_ye = -2.0 * a * y_e + out * k_e / ee_m - gamma_g * 2.0 / (SQRT_PI * erfcx(y_e))
    return d_gg, d_ye, d_yi


def y_e_from_cone(y_i: float, a_cone: float) -> float:
    """y_e implied by y_i through the cone odds ratio at a stationary point."""
    e_p, e_m = erfc(y_i), erfc(-y_i)
    return erf_inv((e_p - a_cone * e_m) / (e_p + a_cone * e_m))
