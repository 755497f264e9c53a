"""Phase transitions and large-deviation rates of binary and box l1 recovery."""

__version__ = "0.1.0"

import importlib

# submodules load on first attribute access; numba and scipy.stats are slow to import
_LAZY = {
    "DomainError": "params",
    "Model": "params",
    "ModelParams": "params",
    "BracketError": "search",
    "expected_width_gap": "analytic_pt",
    "pt_alpha": "analytic_pt",
    "pt_beta": "analytic_pt",
    "pt_curve": "analytic_pt",
    "xi": "analytic_pt",
    "xi_bin": "analytic_pt",
    "xi_box": "analytic_pt",
    "LdpSolution": "ldp_analytic",
    "Tail": "ldp_analytic",
    "rate_curve": "ldp_analytic",
    "rate_function": "ldp_analytic",
    "solve_ldp": "ldp_analytic",
    "GeometryParts": "oracles",
    "ZetaProbPoint": "oracles",
    "minimize_zeta_prob": "oracles",
    "solve_geom": "oracles",
    "zeta_geom": "oracles",
    "zeta_prob": "oracles",
    "InstanceDims": "linalg_lp",
    "ProblemInstance": "linalg_lp",
    "dims_for": "linalg_lp",
    "gen_instance": "linalg_lp",
    "null_space_failure": "linalg_lp",
    "solve_box_l1": "linalg_lp",
    "solve_lp": "linalg_lp",
    "Method": "montecarlo",
    "RateEstimate": "montecarlo",
    "run_trials": "montecarlo",
}


def __getattr__(name):
    mod = _LAZY.get(name)
    if mod is None:
        raise AttributeError(f"module 'boxl1' has no attribute {name!r}")
    value = getattr(importlib.import_module(f".{mod}", __name__), name)
    globals()[name] = value
    return value


def __dir__():
    return sorted(list(globals()) + list(_LAZY))


__all__ = [
    "__version__",
    "DomainError",
    "BracketError",
    "Model",
    "ModelParams",
    "xi",
    "xi_bin",
    "xi_box",
    "pt_alpha",
    "pt_beta",
    "pt_curve",
    "expected_width_gap",
    "LdpSolution",
    "Tail",
    "solve_ldp",
    "rate_function",
    "rate_curve",
    "ZetaProbPoint",
    "GeometryParts",
    "zeta_prob",
    "zeta_geom",
    "minimize_zeta_prob",
    "solve_geom",
    "InstanceDims",
    "ProblemInstance",
    "dims_for",
    "gen_instance",
    "solve_lp",
    "solve_box_l1",
    "null_space_failure",
    "Method",
    "RateEstimate",
    "run_trials",
]
