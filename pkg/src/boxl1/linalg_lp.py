"""Random instances, a dense bounded-variable revised simplex, and the
null-space recovery condition for binary and box l1 recovery.

The LP solver handles

    min c.x   s.t.  A x = b,  lo <= x <= hi

with finite lower bounds and finite or infinite upper bounds. Every solve
ends with a duality-gap certificate computed from the final multipliers
alone, so a wrong pivot sequence cannot silently report a non-optimal point.
"""

from __future__ import annotations

import csv
import enum
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numba import njit

from .params import Model, ModelParams

__all__ = [
    "InstanceDims",
    "ProblemInstance",
    "LpResult",
    "LpError",
    "LpInfeasible",
    "Tag",
    "dims_for",
    "gen_instance",
    "solve_lp",
    "solve_box_l1",
    "null_space_failure",
    "recovered",
    "save_instance",
    "load_instance",
    "instance_for",
]

SUCCESS_TOL = 1e-6
GAP_TOL = 1e-9


class LpError(RuntimeError):
    """Infeasible, unbounded or stalled LP, or a failed certificate."""


class LpInfeasible(LpError):
    """Phase one ended with a positive artificial residual."""


class Tag(enum.IntEnum):
    ZERO = 0
    ONE = 1
    INTERIOR = 2


@dataclass(frozen=True)
class InstanceDims:
    n: int
    m: int
    k: int
    n_zero: int
    n_one: int

    def __post_init__(self):
        if not (0 <= self.k <= self.m <= self.n):
            raise ValueError(f"need 0 <= k <= m <= n, got k={self.k} m={self.m} n={self.n}")
        if self.n_zero < 0 or self.n_one < 0:
            raise ValueError(f"negative pattern counts in {self}")
        if not (self.is_binary_layout or self.n_zero + self.n_one + self.k == self.n):
            raise ValueError(f"inconsistent pattern counts in {self}")

    @property
    def is_binary_layout(self) -> bool:
        return self.n_zero == self.n - self.k and self.n_one == self.k


def dims_for(n: int, m: int, k: int, model: Model, mu: float | None = None) -> InstanceDims:
    """Pattern counts for a model. Box rounds mu*(n-k) to the nearest integer."""
    if Model.parse(model) is Model.BINARY:
        return InstanceDims(n, m, k, n - k, k)
    if mu is None:
        raise ValueError("box instances need mu")
    n_zero = int(np.floor(mu * (n - k) + 0.5))
    return InstanceDims(n, m, k, n_zero, n - k - n_zero)


@dataclass
class ProblemInstance:
    a_matrix: np.ndarray
    x_true: np.ndarray
    y_vec: np.ndarray
    pattern: np.ndarray  # Tag per index
    seed: int | None = None
    model: Model = Model.BINARY
    meta: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.a_matrix.shape[1]

    @property
    def m(self) -> int:
        return self.a_matrix.shape[0]


def _rng(seed) -> np.random.Generator:
    # Philox is counter based; normals come from numpy's ziggurat transform
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def gen_instance(dims: InstanceDims, model: Model, mu: float | None = None,
                 seed: int | tuple = 0, interior_value: float | None = None) -> ProblemInstance:
    """Draw A with i.i.d. N(0,1) entries and plant a binary or box vector.

    The planted layout is zeros, then ones, then interior entries, after
    which a seeded permutation shuffles columns. ``interior_value`` replaces
    the default uniform(0,1) interior draws with a constant.
    """
    model = Model.parse(model)
    if model is Model.BOX and dims.n_zero + dims.n_one + dims.k != dims.n:
        raise ValueError("box instances need box dims (see dims_for)")
    rng = _rng(seed)
    a = rng.standard_normal((dims.m, dims.n))
    if model is Model.BINARY:
        tags = np.concatenate([np.full(dims.n - dims.k, Tag.ZERO), np.full(dims.k, Tag.ONE)])
        x = (tags == Tag.ONE).astype(float)
    else:
        tags = np.concatenate([np.full(dims.n_zero, Tag.ZERO), np.full(dims.n_one, Tag.ONE),
                               np.full(dims.k, Tag.INTERIOR)])
        x = (tags == Tag.ONE).astype(float)
        if interior_value is None:
            vals = rng.uniform(0.0, 1.0, dims.k)
            vals[vals == 0.0] = 0.5  # uniform on [0,1) can return 0
        else:
            if not 0.0 < interior_value < 1.0:
                raise ValueError("interior value must lie in (0,1)")
            vals = np.full(dims.k, float(interior_value))
        x[tags == Tag.INTERIOR] = vals
    perm = rng.permutation(dims.n)
    x = x[perm]
    tags = tags[perm].astype(np.int8)
    return ProblemInstance(a, x, a @ x, tags, seed=seed if isinstance(seed, int) else None,
                           model=model)


@dataclass
class LpResult:
    x: np.ndarray
    objective: float
    dual_objective: float
    gap: float
    iterations: int
    multipliers: np.ndarray


@njit(cache=True)
def _refactor(at, b, x, basis, is_basic):
    m = at.shape[1]
    bmat_t = np.empty((m, m))
    for r in range(m):
        bmat_t[r] = at[basis[r]]
    binv = np.ascontiguousarray(np.linalg.inv(bmat_t).T)
    rhs = b.copy()
    for j in range(at.shape[0]):
        if not is_basic[j] and x[j] != 0.0:
            rhs -= at[j] * x[j]
    xb = binv @ rhs
    for r in range(m):
        x[basis[r]] = xb[r]
    return binv


@njit(cache=True)
def _pivot_loop(at, b, c, lo, hi, x, basis, is_basic, binv, iters, max_iter,
                ptol, dtol, refactor_every, bland_after):
    """Primal simplex iterations until optimal (0), unbounded (1) or the
    iteration limit (2). ``at`` is the transposed constraint matrix.
    Returns (status, iters, binv)."""
    ntot, m = at.shape
    degenerate_run = 0
    bland = False
    bland_ref = np.inf
    since = 0
    cb = np.empty(m)
    xb = np.empty(m)
    while True:
        if iters >= max_iter:
            return 2, iters, binv
        for r in range(m):
            cb[r] = c[basis[r]]
        lam = cb @ binv
        d = c - at @ lam
        # pricing: Dantzig, or Bland's smallest index
        j = -1
        best = 0.0
        for q in range(ntot):
            if is_basic[q] or hi[q] <= lo[q]:
                continue
            dq = d[q]
            if x[q] <= lo[q] + ptol:
                viol = -dq
            else:
                viol = dq
            if viol > dtol:
                if bland:
                    j = q
                    break
                if viol > best:
                    best = viol
                    j = q
        if j < 0:
            return 0, iters, binv
        direction = 1.0 if x[j] <= lo[j] + ptol else -1.0
        col = binv @ at[j]
        r_best = -1
        t_row = np.inf
        for r in range(m):
            xb[r] = x[basis[r]]
            delta = -direction * col[r]
            if delta < -1e-11:
                t = (xb[r] - lo[basis[r]]) / -delta
            elif delta > 1e-11:
                t = (hi[basis[r]] - xb[r]) / delta
            else:
                continue
            if t < 0.0:
                t = 0.0
            if t < t_row - 1e-12 or (bland and t <= t_row + 1e-12 and r_best >= 0
                                     and basis[r] < basis[r_best]):
                t_row = t
                r_best = r
        t_flip = hi[j] - lo[j]
        if not np.isfinite(t_row) and not np.isfinite(t_flip):
            return 1, iters, binv
        iters += 1
        if t_flip <= t_row:
            t = t_flip
            for r in range(m):
                x[basis[r]] = xb[r] - t * direction * col[r]
            x[j] = hi[j] if direction > 0 else lo[j]
        else:
            t = t_row
            for r in range(m):
                x[basis[r]] = xb[r] - t * direction * col[r]
            x[j] += direction * t
            leaving = basis[r_best]
            x[leaving] = lo[leaving] if -direction * col[r_best] < 0 else hi[leaving]
            piv = col[r_best]
            row = binv[r_best] / piv
            for r in range(m):
                if r != r_best and col[r] != 0.0:
                    binv[r] -= col[r] * row
            binv[r_best] = row
            basis[r_best] = j
            is_basic[j] = True
            is_basic[leaving] = False
            since += 1
            if since >= refactor_every:
                binv = _refactor(at, b, x, basis, is_basic)
                since = 0
        obj = 0.0
        for q in range(ntot):
            obj += c[q] * x[q]
        if bland:
            # leave Bland only on real progress, not on rounding noise
            if obj < bland_ref - 1e-9 * (1.0 + abs(bland_ref)):
                bland = False
                degenerate_run = 0
        elif t * abs(d[j]) <= 1e-12:
            degenerate_run += 1
            if degenerate_run >= bland_after:
                bland = True
                bland_ref = obj
        else:
            degenerate_run = 0


class _Simplex:
    """Bounded revised simplex on an explicit basis inverse.

    Pricing is Dantzig's rule; after a run of degenerate pivots it switches
    to Bland's rule until the objective moves again, which rules out
    cycling.
    """

    REFACTOR = 64
    BLAND_AFTER = 50

    def __init__(self, a, b, lo, hi, max_iter):
        self.a = np.asarray(a, dtype=float)
        self.at = np.ascontiguousarray(self.a.T)
        self.b = np.ascontiguousarray(b, dtype=float)
        self.lo = lo
        self.hi = hi
        self.max_iter = max_iter
        self.iters = 0

    def setup(self, basis, x):
        self.basis = np.array(basis, dtype=np.int64)
        self.x = x
        self.is_basic = np.zeros(self.a.shape[1], dtype=np.bool_)
        self.is_basic[self.basis] = True
        self.refactor()

    def refactor(self):
        self.binv = _refactor(self.at, self.b, self.x, self.basis, self.is_basic)

    def run(self, c, ptol=1e-9, dtol=1e-9):
        c = np.ascontiguousarray(c, dtype=float)
        status, self.iters, self.binv = _pivot_loop(
            self.at, self.b, c, self.lo, self.hi, self.x, self.basis, self.is_basic, self.binv,
            self.iters, self.max_iter, ptol, dtol, self.REFACTOR, self.BLAND_AFTER)
        if status == 1:
            raise LpError("LP is unbounded")
        if status == 2:
            raise LpError("simplex iteration limit reached")


def solve_lp(c, a, b, lo, hi, max_iter: int | None = None, gap_tol: float = GAP_TOL,
             perturb: float = 1e-9, warm_basis=None, warm_x=None) -> LpResult:
    """Bounded revised simplex with a duality-gap certificate.

    Bounds are pushed outward by fixed pseudo-random amounts of relative
    size ``perturb`` while pivoting. The relaxation keeps feasibility and
    removes the massive degeneracy of planted-vertex and cone problems.
    Afterwards nonbasic variables snap back to their original bounds, the
    basic ones are recomputed, and the certificate is evaluated on the
    original problem.

    Without a warm start, phase one drives artificials out from x = lo.
    ``warm_basis`` (m column indices) with ``warm_x`` (a feasible point whose
    non-basis entries sit on bounds) skips phase one entirely.
    """
    c = np.asarray(c, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    lo_orig = np.asarray(lo, dtype=float)
    hi_orig = np.asarray(hi, dtype=float)
    m, n = a.shape
    if not np.all(np.isfinite(lo_orig)):
        raise ValueError("lower bounds must be finite")
    if np.any(hi_orig < lo_orig):
        raise LpError("empty bounds")
    if max_iter is None:
        max_iter = 50 * (m + n) + 1000
    scale = 1.0 + np.abs(b).max(initial=0.0)
    finite_hi = np.isfinite(hi_orig)

    u = np.random.default_rng(m * 7919 + n).uniform(0.5, 1.0, (2, n)) * perturb
    lo_p = lo_orig - u[0] * (1.0 + np.abs(lo_orig))
    hi_p = np.where(finite_hi, hi_orig + u[1] * (1.0 + np.abs(hi_orig)), np.inf)

    if warm_basis is not None:
        basis = np.asarray(warm_basis, dtype=int)
        x = np.asarray(warm_x, dtype=float).copy()
        nonbasic = np.ones(n, dtype=bool)
        nonbasic[basis] = False
        # a nonbasic variable keeps its exact bound on the side it sits on
        on_hi = nonbasic & finite_hi & (np.abs(x - hi_orig) < np.abs(x - lo_orig))
        on_lo = nonbasic & ~on_hi
        if np.abs(x[on_lo] - lo_orig[on_lo]).max(initial=0.0) > 1e-12 or \
                np.abs(x[on_hi] - hi_orig[on_hi]).max(initial=0.0) > 1e-12:
            raise ValueError("warm start: nonbasic entries must sit on bounds")
        lo_p[on_lo] = lo_orig[on_lo]
        hi_p[on_hi] = hi_orig[on_hi]
        spx = _Simplex(a, b, lo_p, hi_p, max_iter)
        spx.setup(basis, x)
        xb = spx.x[basis]
        if np.any(xb < lo_p[basis]) or np.any(xb > hi_p[basis]):
            raise LpError("warm start is not feasible")
        spx.run(c)
        c_ext = c
    else:
        x0 = lo_p.copy()
        resid = b - a @ x0
        signs = np.where(resid >= 0, 1.0, -1.0)
        a_ext = np.hstack([a, np.diag(signs)])
        lo_ext = np.concatenate([lo_p, np.zeros(m)])
        hi_ext = np.concatenate([hi_p, np.full(m, np.inf)])
        spx = _Simplex(a_ext, b, lo_ext, hi_ext, max_iter)
        spx.setup(np.arange(n, n + m), np.concatenate([x0, np.abs(resid)]))
        spx.run(np.concatenate([np.zeros(n), np.ones(m)]))
        infeas = spx.x[n:].sum()
        if infeas > 1e-8 * scale:
            raise LpInfeasible(f"LP is infeasible (phase-1 residual {infeas:.3e})")
        # artificials are pinned to zero for phase two
        spx.hi[n:] = 0.0
        spx.x[n:] = 0.0
        spx.refactor()
        c_ext = np.concatenate([c, np.zeros(m)])
        spx.run(c_ext)

    nb = np.flatnonzero(~spx.is_basic[:n])
    xs = spx.x[nb]
    on_hi = np.abs(xs - spx.hi[nb]) < np.abs(xs - spx.lo[nb])
    spx.x[nb] = np.where(on_hi, hi_orig[nb], lo_orig[nb])
    spx.lo[:n] = lo_orig
    spx.hi[:n] = hi_orig
    spx.refactor()
    lam = c_ext[spx.basis] @ spx.binv
    drift = np.maximum(spx.lo - spx.x, spx.x - spx.hi).max(initial=0.0)
    if drift > 1e3 * perturb * scale + 1e-9:
        raise LpError(f"final basis infeasible on the unperturbed data ({drift:.3e})")

    x = np.clip(spx.x[:n], lo_orig, hi_orig)
    primal = float(c @ x)
    dual, feasible = _dual_bound(c, a, b, lo_orig, hi_orig, lam)
    gap = primal - dual
    if not feasible or gap > gap_tol * (1.0 + abs(primal)):
        raise LpError(f"duality-gap certificate failed: gap={gap:.3e}, dual feasible={feasible}")
    return LpResult(x, primal, dual, gap, spx.iters, lam)


def _dual_bound(c, a, b, lo, hi, lam, dtol=1e-9):
    """Lagrangian lower bound b.lam + sum of box terms for any multipliers."""
    d = c - lam @ a
    zl = np.maximum(d, 0.0)
    zu = np.maximum(-d, 0.0)
    inf_hi = ~np.isfinite(hi)
    feasible = bool(np.all(zu[inf_hi] <= dtol))
    hi_f = np.where(inf_hi, 0.0, hi)
    return float(b @ lam + lo @ zl - hi_f @ zu), feasible


def solve_box_l1(inst: ProblemInstance, tol: float = 1e-9, warm: bool = True) -> np.ndarray:
    """min sum(x) s.t. A x = y, 0 <= x <= 1, with post-conditions asserted.

    With ``warm`` the simplex starts at the planted vector, which is
    feasible by construction: the basis holds every interior column plus
    the first remaining columns. Optimality is still decided by pricing and
    certified by the duality gap, so the start only saves phase one.
    """
    n, m = inst.n, inst.m
    a, y = inst.a_matrix, inst.y_vec
    ones, zeros = np.ones(n), np.zeros(n)
    res = None
    if warm and m < n:
        inter = np.flatnonzero(inst.pattern == Tag.INTERIOR)
        rest = np.flatnonzero(inst.pattern != Tag.INTERIOR)
        basis = np.concatenate([inter, rest[: m - inter.size]])
        try:
            res = solve_lp(ones, a, y, zeros, ones, warm_basis=basis, warm_x=inst.x_true)
        except (LpError, np.linalg.LinAlgError):
            res = None
    if res is None:
        res = solve_lp(ones, a, y, zeros, ones)
    x = res.x
    ynorm = 1.0 + np.abs(y).max(initial=0.0)
    viol = np.abs(a @ x - y).max(initial=0.0)
    if viol > 1e3 * tol * ynorm:
        raise LpError(f"equality residual {viol:.3e} too large")
    if x.sum() > inst.x_true.sum() + max(tol, 1e-9 * n):
        raise LpError("LP optimum exceeds the planted objective")
    return x


def recovered(inst: ProblemInstance, x_hat: np.ndarray, tol: float = SUCCESS_TOL) -> bool:
    return bool(np.abs(x_hat - inst.x_true).max(initial=0.0) <= tol)


def null_space_failure(inst: ProblemInstance, tol: float = 1e-9) -> bool:
    """True when some w in null(A) with the pattern's sign constraints has
    sum(w) <= 0, i.e. the planted vector is not the unique LP optimum.

    Variables: u >= 0 on zeros (w = u), v >= 0 on ones (w = -v), and
    p, q >= 0 on interior indices (w = p - q), normalised by
    sum(u) + sum(v) = 1. Interior splits stay out of the normalisation:
    p = q would otherwise satisfy it with w = 0 and objective 0. Nothing is
    lost, since A restricted to the k < m interior columns has a trivial
    null space, so every nonzero cone element has u or v nonzero.
    """
    a = inst.a_matrix
    m, n = a.shape
    if m >= n:
        return False
    tags = inst.pattern
    zero = np.flatnonzero(tags == Tag.ZERO)
    one = np.flatnonzero(tags == Tag.ONE)
    inter = np.flatnonzero(tags == Tag.INTERIOR)
    cols = np.hstack([a[:, zero], -a[:, one], a[:, inter], -a[:, inter]])
    nv = cols.shape[1]
    norm_row = np.concatenate([np.ones(zero.size + one.size), np.zeros(2 * inter.size)])
    a_lp = np.vstack([cols, norm_row])
    b_lp = np.concatenate([np.zeros(m), [1.0]])
    c = np.concatenate([np.ones(zero.size), -np.ones(one.size), np.ones(inter.size),
                        -np.ones(inter.size)])
    try:
        res = solve_lp(c, a_lp, b_lp, np.zeros(nv), np.full(nv, np.inf))
    except LpInfeasible:
        # the sign-constrained cone is {0}: no descent direction exists
        return False
    return res.objective <= tol


def save_instance(inst: ProblemInstance, stem: str | Path) -> tuple[Path, Path]:
    """Write ``stem.csv`` (A, one row per line) and ``stem.json`` (pattern, x, seed)."""
    stem = Path(stem)
    csv_path = stem.with_suffix(".csv")
    json_path = stem.with_suffix(".json")
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh)
        for row in inst.a_matrix:
            w.writerow([repr(float(v)) for v in row])
    side = {
        "schema": 1,
        "model": inst.model.value,
        "seed": inst.seed,
        "m": inst.m,
        "n": inst.n,
        "pattern": [Tag(int(t)).name.lower() for t in inst.pattern],
        "x_true": [float(v) for v in inst.x_true],
        "meta": inst.meta,
    }
    json_path.write_text(json.dumps(side, indent=1))
    return csv_path, json_path


def load_instance(stem: str | Path) -> ProblemInstance:
    stem = Path(stem)
    a = np.loadtxt(stem.with_suffix(".csv"), delimiter=",", ndmin=2)
    side = json.loads(stem.with_suffix(".json").read_text())
    tags = np.array([Tag[s.upper()] for s in side["pattern"]], dtype=np.int8)
    x = np.array(side["x_true"], dtype=float)
    return ProblemInstance(a, x, a @ x, tags, seed=side["seed"], model=Model(side["model"]),
                           meta=side.get("meta", {}))


def instance_for(params: ModelParams, n: int, seed) -> ProblemInstance:
    """Instance with m = round(alpha n), k = round(beta n)."""
    m = int(round(params.alpha * n))
    k = int(round(params.beta * n))
    return gen_instance(dims_for(n, m, k, params.model, params.mu), params.model, params.mu, seed)
