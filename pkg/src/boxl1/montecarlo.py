"""Monte Carlo estimates of the finite-n decay rates log(P_err)/n and log(P_cor)/n.

Every trial draws its own instance from the sub-seed ``(seed, index)``, so
counts do not depend on scheduling or on the number of workers.
"""

from __future__ import annotations

import enum
import math
import platform
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numba
import numpy as np
import scipy

from .linalg_lp import (InstanceDims, LpError, gen_instance, null_space_failure, recovered,
                        solve_box_l1)
from .ldp_analytic import rate_function
from .params import DomainError, Model, ModelParams
from .search import BracketError

__all__ = [
    "Method",
    "RateEstimate",
    "run_trials",
    "trial_outcome",
    "wilson_interval",
    "theory_rate",
    "CSV_COLUMNS",
    "estimate_row",
    "run_manifest",
    "summarize",
]

CSV_COLUMNS = ["alpha", "beta", "mu", "n", "m", "k", "trials", "failures", "errors",
               "i_err_hat", "i_cor_hat", "ci_lo", "ci_hi", "ci_cor_lo", "ci_cor_hi",
               "censored_bound", "theory_rate", "method", "seed"]


class Method(str, enum.Enum):
    LP = "lp"  # solve the LP and compare with the planted vector
    NULLSPACE = "nullspace"  # test the sign-constrained null-space condition

    @classmethod
    def parse(cls, value) -> "Method":
        if isinstance(value, Method):
            return value
        v = str(value).strip().lower().replace("_", "").replace("-", "")
        if v in ("lp", "lpcompare"):
            return cls.LP
        if v in ("nullspace", "ns"):
            return cls.NULLSPACE
        raise ValueError(f"unknown method {value!r}")


@dataclass(frozen=True)
class RateEstimate:
    """Failure counts and log-rate estimates for one configuration.

    ``i_err_hat`` is None when no failure was seen and ``i_cor_hat`` is None
    when no success was seen; ``censored_bound`` = log(1/valid)/n is the
    one-sided bound that applies to a censored rate.
    """

    dims: InstanceDims
    model: Model
    mu: float | None
    trials: int
    failures: int
    errors: int
    method: Method
    seed: int
    i_err_hat: float | None
    i_cor_hat: float | None
    ci95: tuple[float, float]
    ci95_cor: tuple[float, float]
    censored_bound: float

    @property
    def valid(self) -> int:
        return self.trials - self.errors

    @property
    def successes(self) -> int:
        return self.valid - self.failures


def wilson_interval(k: int, n: int, confidence: float = 0.95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion k/n."""
    from scipy.stats import binomtest  # deferred: slow import

    if n <= 0:
        return 0.0, 1.0
    ci = binomtest(k, n).proportion_ci(confidence_level=confidence, method="wilson")
    return float(ci.low), float(ci.high)


def _log_rate(p: float, n: int) -> float:
    return math.log(p) / n if p > 0.0 else -math.inf


def trial_outcome(dims: InstanceDims, model: Model, mu: float | None, seed: int, index: int,
                  method: Method, interior_value: float | None = None) -> int | None:
    """1 on recovery failure, 0 on success, None when the solver gave up."""
    inst = gen_instance(dims, model, mu, seed=(seed, index), interior_value=interior_value)
    try:
        if method is Method.LP:
            return 0 if recovered(inst, solve_box_l1(inst)) else 1
        return 1 if null_space_failure(inst) else 0
    except (LpError, np.linalg.LinAlgError):
        return None


def _chunk(args) -> tuple[int, int]:
    dims, model, mu, seed, lo, hi, method, interior = args
    fails = errs = 0
    for i in range(lo, hi):
        r = trial_outcome(dims, model, mu, seed, i, method, interior)
        if r is None:
            errs += 1
        else:
            fails += r
    return fails, errs


def run_trials(dims: InstanceDims, model, mu: float | None, trials: int, seed: int,
               method="lp", threads: int = 1, interior_value: float | None = None) -> RateEstimate:
    """Run ``trials`` independent trials and summarise them.

    ``threads`` > 1 spreads contiguous index blocks over worker processes;
    the result is a sum of counts and does not depend on it.
    ``interior_value`` fixes every box interior entry to one constant.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    model = Model.parse(model)
    method = Method.parse(method)
    if model is Model.BOX and mu is None:
        raise DomainError("box trials need mu")
    threads = max(1, int(threads))
    if threads == 1:
        fails, errs = _chunk((dims, model, mu, seed, 0, trials, method, interior_value))
    else:
        edges = np.linspace(0, trials, min(trials, 4 * threads) + 1).astype(int)
        jobs = [(dims, model, mu, seed, int(a), int(b), method, interior_value)
                for a, b in zip(edges, edges[1:]) if b > a]
        with ProcessPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(_chunk, jobs))
        fails = sum(p[0] for p in parts)
        errs = sum(p[1] for p in parts)
    return summarize(dims, model, mu, trials, fails, errs, method, seed)


def summarize(dims: InstanceDims, model: Model, mu: float | None, trials: int, failures: int,
              errors: int, method: Method, seed: int) -> RateEstimate:
    """Build a RateEstimate from raw counts."""
    n = dims.n
    valid = trials - errors
    succ = valid - failures
    lo, hi = wilson_interval(failures, valid)
    i_err = _log_rate(failures / valid, n) if failures > 0 else None
    i_cor = _log_rate(succ / valid, n) if succ > 0 else None
    # valid == 0 leaves both rates censored and the interval at (0, 1)
    ci_err = (_log_rate(lo, n), _log_rate(hi, n))
    ci_cor = (_log_rate(1.0 - hi, n), _log_rate(1.0 - lo, n))
    bound = math.log(1.0 / valid) / n if valid > 0 else -math.inf
    return RateEstimate(dims, model, mu, trials, failures, errors, method, seed,
                        i_err, i_cor, ci_err, ci_cor, bound)


def theory_rate(alpha: float, beta: float, mu: float | None, model) -> float | None:
    """Closed-form rate at (alpha, beta, mu), or None outside its domain."""
    try:
        return rate_function(ModelParams(alpha, beta, mu, Model.parse(model)))
    except (DomainError, BracketError):
        return None


def estimate_row(est: RateEstimate, alpha: float | None = None, beta: float | None = None) -> dict:
    """CSV/JSON row. alpha and beta default to m/n and k/n."""
    d = est.dims
    alpha = d.m / d.n if alpha is None else alpha
    beta = d.k / d.n if beta is None else beta
    return {
        "alpha": alpha,
        "beta": beta,
        "mu": est.mu,
        "n": d.n,
        "m": d.m,
        "k": d.k,
        "trials": est.trials,
        "failures": est.failures,
        "errors": est.errors,
        "i_err_hat": est.i_err_hat,
        "i_cor_hat": est.i_cor_hat,
        "ci_lo": est.ci95[0],
        "ci_hi": est.ci95[1],
        "ci_cor_lo": est.ci95_cor[0],
        "ci_cor_hi": est.ci95_cor[1],
        "censored_bound": est.censored_bound,
        "theory_rate": theory_rate(alpha, beta, est.mu, est.model),
        "method": est.method.value,
        "seed": est.seed,
    }


def run_manifest(seed: int, method, extra: dict | None = None) -> dict:
    """Provenance record for a simulation run."""
    from . import __version__

    out = {
        "schema_version": 1,
        "seed": seed,
        "method": Method.parse(method).value,
        "versions": {
            "boxl1": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "numba": numba.__version__,
        },
    }
    if extra:
        out.update(extra)
    return out
