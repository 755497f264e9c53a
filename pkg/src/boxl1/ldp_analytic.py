"""Closed-form large-deviation solution for binary and box l1 recovery.

A single scalar equation fixes y2; every other optimiser variable and the
rate itself follow from y2 in closed form. The same (y1, y2) serves both
tails; the sign of c3 tells which tail a point is in.

Two identities are implemented in the form that reproduces the published
tables rather than as printed next to them:

* nu = sqrt(2) y1 (the printed block has y2; y1 = nu / sqrt(2) is the
  defining relation, and the tables follow it),
* gamma = c3 / (2 (1 - A0^2)) = sqrt(alpha) / (2 A0) (the printed block
  drops the square on A0). The second form has no 0/0 at the transition.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass
from typing import Iterable

from .params import DomainError, Model, ModelParams
from .search import BracketError, find_root, log_grid
from .specfun import SQRT_PI, erf_inv, erfc, erfcx

__all__ = [
    "Tail",
    "LdpSolution",
    "f1_bin",
    "f1_box",
    "f1_pair",
    "fixed_point_ratio",
    "fixed_point_residual",
    "solve_ldp",
    "rate_function",
    "rate_curve",
    "gamma_g_from_yi",
    "cone_ratio",
    "TRANSITION_C3",
]

TRANSITION_C3 = 1e-9
_Y_MAX = 25.0


class Tail(str, enum.Enum):
    UPPER = "upper"
    LOWER = "lower"
    AT_TRANSITION = "at_transition"


@dataclass(frozen=True)
class LdpSolution:
    y1: float
    y2: float
    nu: float
    a0: float
    c3: float
    gamma: float
    gamma_g: float
    a_cone: float
    rate: float
    tail: Tail

    def as_row(self) -> dict:
        row = asdict(self)
        row["tail"] = self.tail.value
        return row


def _guard(y: float):
    if not math.isfinite(y) or abs(y) > _Y_MAX:
        raise DomainError(f"|y| = {abs(y)} beyond the overflow guard {_Y_MAX}")


def f1_bin(y: float, alpha: float, beta: float) -> float:
    """(1-beta)/alpha * 2y e^{y^2} / (sqrt(pi) y e^{y^2} erfc(-y) + 1) - y e^{y^2} erfc(y)."""
    _guard(y)
    if y == 0.0:
        return 0.0
    denom = SQRT_PI * y * erfcx(-y) + 1.0
    return (1.0 - beta) / alpha * 2.0 * y * math.exp(y * y) / denom - y * erfcx(y)


def f1_box(y: float, alpha: float, beta: float, mu: float) -> float:
    """2 mu (1-beta) y e^{y^2} / (alpha (sqrt(pi) y e^{y^2} erfc(-y) + 1) - beta) - y e^{y^2} erfc(y)."""
    _guard(y)
    if y == 0.0:
        return 0.0
    denom = alpha * (SQRT_PI * y * erfcx(-y) + 1.0) - beta
    if denom == 0.0 or abs(denom) < 1e-14:
        raise DomainError(f"f1_box pole at y={y}")
    return 2.0 * mu * (1.0 - beta) * y * math.exp(y * y) / denom - y * erfcx(y)


def f1_pair(y2: float, params: ModelParams) -> tuple[float, float]:
    """(f1 at y2, partner f1 at -y2) for the model."""
    a, b = params.alpha, params.beta
    if params.model is Model.BINARY:
        return f1_bin(y2, a, b), f1_bin(-y2, a, 1.0 - b)
    mu = params.mu
    return f1_box(y2, a, b, mu), f1_box(-y2, a, b, 1.0 - mu)


def fixed_point_ratio(y2: float, params: ModelParams) -> float:
    """R = (f1 + f1') / (f1 - f1'); at the solution erf(y1) = R."""
    p, q = f1_pair(y2, params)
    if p == q:
        raise DomainError("degenerate f1 pair")
    return (p + q) / (p - q)


def fixed_point_residual(y2: float, params: ModelParams) -> float:
    """2 erf_inv(R) e^{erf_inv(R)^2} / (f1 - f1') - 1."""
    if not y2 > 0.0:
        raise DomainError("y2 must be positive")
    p, q = f1_pair(y2, params)
    if p == q:
        raise DomainError("degenerate f1 pair")
    r = (p + q) / (p - q)
    if not -1.0 < r < 1.0:
        raise DomainError(f"ratio R={r} outside (-1,1)")
    z = erf_inv(r)
    return 2.0 * z * math.exp(z * z) / (p - q) - 1.0


def _edge_point(safe, inside: float, outside: float) -> tuple[float, float] | None:
    """Bisect towards the domain edge between a defined and an undefined
    point; return the defined point closest to the edge and its value."""
    v_in = safe(inside)
    for _ in range(80):
        mid = 0.5 * (inside + outside)
        if mid in (inside, outside):
            break
        v = safe(mid)
        if v is None:
            outside = mid
        else:
            inside, v_in = mid, v
    return (inside, v_in) if v_in is not None else None


def _solve_y2(params: ModelParams) -> float:
    """Scan (1e-6, 10) in 256 geometric steps for a sign change.

    Near mu = 1 the root can sit within a few percent of an edge where the
    ratio R leaves (-1, 1); such segments are refined by bisecting to the
    edge so the narrow admissible window is not stepped over.
    """
    grid = log_grid(1e-6, 10.0, 256)

    def safe(y):
        try:
            return fixed_point_residual(y, params)
        except DomainError:
            return None

    def resid(y):
        return fixed_point_residual(y, params)

    vals = [safe(y) for y in grid]
    for ya, va, yb, vb in zip(grid, vals, grid[1:], vals[1:]):
        if va is not None and va == 0.0:
            return ya
        if va is not None and vb is not None:
            if va * vb < 0.0:
                return find_root(resid, ya, yb)
            continue
        if va is None and vb is None:
            continue
        if va is None:
            edge = _edge_point(safe, yb, ya)
            if edge is not None and edge[1] * vb < 0.0:
                return find_root(resid, edge[0], yb)
        else:
            edge = _edge_point(safe, ya, yb)
            if edge is not None and edge[1] * va < 0.0:
                return find_root(resid, ya, edge[0])
    raise BracketError(f"no interior root of the LDP fixed point for {params}")


def gamma_g_from_yi(y_i: float, params: ModelParams) -> float:
    """Stationary gamma_g of the geometric decomposition as a function of y_i."""
    a, b = params.alpha, params.beta
    core = 0.5 * a * (SQRT_PI * y_i * erfcx(y_i) * erfc(-y_i) - erfc(-y_i))
    if params.model is Model.BINARY:
        return core + b
    return core - (1.0 - b) * params.mu + 1.0 - 0.5 * erfc(y_i) * b


def cone_ratio(gamma_g: float, params: ModelParams) -> float:
    """A_bin or A_box, the odds ratio fixing y_e from y_i."""
    a, b = params.alpha, params.beta
    if params.model is Model.BINARY:
        return (a - b + gamma_g) / (1.0 - a - gamma_g) * gamma_g / (b - gamma_g)
    p = params.mu * (1.0 - b)
    q = (1.0 - params.mu) * (1.0 - b)
    return (p - (1.0 - a - gamma_g)) / (1.0 - a - gamma_g) * gamma_g / (q - gamma_g)


def _xlogy_ratio(w: float, num: float, den: float) -> float:
    """w * log(num / den) with the 0 log 0 = 0 convention."""
    if w == 0.0:
        return 0.0
    if num <= 0.0 or den <= 0.0:
        raise DomainError("log of a non-positive quantity in the rate")
    return w * math.log(num / den)


def _rate_from(y1: float, y2: float, params: ModelParams) -> float:
    a, b = params.alpha, params.beta
    plus = a * (SQRT_PI * y2 * erfcx(-y2) + 1.0)
    minus = a * (1.0 - SQRT_PI * y2 * erfcx(y2))
    base = (a - 1.0) * math.log(y1 / y2) + y2 * y2 - y1 * y1
    if params.model is Model.BINARY:
        return base + _xlogy_ratio(1.0 - b, 1.0 - b, plus) + _xlogy_ratio(b, b, minus)
    p = params.mu * (1.0 - b)
    q = (1.0 - params.mu) * (1.0 - b)
    return base + _xlogy_ratio(p, p, plus - b) + _xlogy_ratio(q, q, minus - b)


def solve_ldp(params: ModelParams) -> LdpSolution:
    """Full closed-form solution at one (alpha, beta, mu)."""
    y2 = _solve_y2(params)
    y1 = erf_inv(fixed_point_ratio(y2, params))
    if not y1 > 0.0:
        raise DomainError(f"non-positive y1={y1} at {params}")
    a0 = y1 / y2
    sa = math.sqrt(params.alpha)
    c3 = (1.0 - a0 * a0) * sa / a0
    gamma = sa / (2.0 * a0)
    gg = gamma_g_from_yi(y2, params)
    a_cone = cone_ratio(gg, params)
    rate = _rate_from(y1, y2, params)
    if abs(c3) <= TRANSITION_C3:
        tail = Tail.AT_TRANSITION
    else:
        tail = Tail.UPPER if c3 > 0 else Tail.LOWER
    return LdpSolution(y1, y2, math.sqrt(2.0) * y1, a0, c3, gamma, gg, a_cone, rate, tail)


def rate_function(params: ModelParams) -> float:
    """Decay rate of P_err above the PT and of P_cor below it."""
    return solve_ldp(params).rate


def rate_curve(beta: float, mu: float | None, model, alpha_grid: Iterable[float]) -> list[dict]:
    """One row per alpha; failed points carry an ``error`` entry."""
    model = Model.parse(model)
    rows = []
    for a in alpha_grid:
        a = float(a)
        try:
            sol = solve_ldp(ModelParams(a, beta, mu if model is Model.BOX else None, model))
            row = {"alpha": a, "beta": beta, "mu": mu, **sol.as_row(), "error": None}
        except (DomainError, BracketError) as exc:
            row = {"alpha": a, "beta": beta, "mu": mu, "error": str(exc)}
        rows.append(row)
    return rows
