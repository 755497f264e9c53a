"""One-dimensional searches used by the PT, LDP and oracle modules."""

from __future__ import annotations

import math
from typing import Callable, Sequence

from scipy.optimize import brentq

__all__ = [
    "golden_section",
    "brent_minimize",
    "parabolic_polish",
    "scan_brackets",
    "find_root",
    "log_grid",
    "BracketError",
]

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
_CGOLD = 1.0 - _INV_PHI


class BracketError(RuntimeError):
    """No sign change found where one was expected."""


def golden_section(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-10,
                   maximize: bool = False, max_iter: int = 200) -> tuple[float, float]:
    """Golden-section search for the extremum of a unimodal function.

    Returns ``(x, f(x))``; ``tol`` is the final bracket width.
    """
    s = -1.0 if maximize else 1.0
    a, b = lo, hi
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = s * f(c), s * f(d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = s * f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = s * f(d)
    x = c if fc < fd else d
    return x, s * min(fc, fd)


def brent_minimize(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-10,
                   maximize: bool = False, max_iter: int = 200) -> tuple[float, float]:
    """Brent's bounded minimiser (golden section with parabolic steps).

    ``tol`` is the absolute tolerance on the abscissa. Returns ``(x, f(x))``.
    """
    s = -1.0 if maximize else 1.0
    a, b = lo, hi
    x = w = v = a + _CGOLD * (b - a)
    fx = fw = fv = s * f(x)
    d = e = 0.0
    for _ in range(max_iter):
        m = 0.5 * (a + b)
        tol1 = 1.5e-8 * abs(x) + tol / 3.0
        tol2 = 2.0 * tol1
        if abs(x - m) <= tol2 - 0.5 * (b - a):
            break
        use_golden = True
        if abs(e) > tol1:
            r = (x - w) * (fx - fv)
            q = (x - v) * (fx - fw)
            p = (x - v) * q - (x - w) * r
            q = 2.0 * (q - r)
            if q > 0.0:
                p = -p
            q = abs(q)
            if abs(p) < abs(0.5 * q * e) and q * (a - x) < p < q * (b - x):
                e, d = d, p / q
                u = x + d
                if u - a < tol2 or b - u < tol2:
                    d = tol1 if m >= x else -tol1
                use_golden = False
        if use_golden:
            e = (a - x) if x >= m else (b - x)
            d = _CGOLD * e
        u = x + (d if abs(d) >= tol1 else (tol1 if d > 0 else -tol1))
        fu = s * f(u)
        if fu <= fx:
            if u >= x:
                a = x
            else:
                b = x
            v, fv, w, fw, x, fx = w, fw, x, fx, u, fu
        else:
            if u < x:
                a = u
            else:
                b = u
            if fu <= fw or w == x:
                v, fv, w, fw = w, fw, u, fu
            elif fu <= fv or v == x or v == w:
                v, fv = u, fu
    return x, s * fx


def parabolic_polish(f: Callable[[float], float], x: float, h: float = 1e-5,
                     lo: float = -math.inf, hi: float = math.inf) -> float:
    """One symmetric three-point parabola step towards a smooth extremum.

    Golden section pins an extremum only to about sqrt(eps); the vertex of
    the parabola through x - h, x, x + h removes most of that error (bias of
    order h^2 f'''/f''). Returns ``x`` unchanged when the curvature is not
    usable or the step would leave [lo, hi].
    """
    if x - h <= lo or x + h >= hi:
        return x
    fm, f0, fp = f(x - h), f(x), f(x + h)
    curv = fp - 2.0 * f0 + fm
    if curv == 0.0 or not math.isfinite(curv):
        return x
    step = h * (fp - fm) / (2.0 * curv)
    if abs(step) > h:
        return x
    return x - step


def scan_brackets(f: Callable[[float], float | None], grid: Sequence[float]) -> list[tuple[float, float]]:
    """Adjacent grid pairs where ``f`` changes sign; ``None`` marks points
    where ``f`` is undefined and breaks any bracket through them."""
    out = []
    prev_x, prev_v = None, None
    for x in grid:
        v = f(x)
        if v is not None and prev_v is not None and (v == 0.0 or prev_v * v < 0.0):
            out.append((prev_x, x))
        prev_x, prev_v = x, v
    return out


def find_root(f: Callable[[float], float], lo: float, hi: float, xtol: float = 1e-15) -> float:
    """Brent root on a sign-changing bracket (scipy's brentq)."""
    return brentq(f, lo, hi, xtol=xtol, rtol=8.9e-16, maxiter=500)


def log_grid(lo: float, hi: float, n: int) -> list[float]:
    r = (hi / lo) ** (1.0 / (n - 1))
    return [lo * r**i for i in range(n)]
