"""Command-line entry point: ``boxl1 {pt,ldp,verify,simulate}``.

Global flags may appear before or after the command. Defaults for
``--seed``, ``--threads``, ``--format`` and ``--trials`` can be set with
BOXL1_SEED, BOXL1_THREADS, BOXL1_FORMAT and BOXL1_TRIALS.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time
import warnings
from pathlib import Path
from typing import Sequence

from . import __version__
from .analytic_pt import pt_alpha, pt_curve
from .ldp_analytic import solve_ldp
from .report import dump_json, write_rows
from .oracles import minimize_zeta_prob, solve_geom
from .params import DomainError, Model, ModelParams
from .search import BracketError

SCHEMA_VERSION = 1
VALUE_TOL = 1e-6
ARGMIN_TOL = 1e-4

PT_COLUMNS = ["alpha", "beta", "mu"]
LDP_COLUMNS = ["alpha", "beta", "mu", "y1", "gamma_g", "a_cone", "y2", "nu", "a0", "c3",
               "gamma", "rate", "tail", "error"]
VERIFY_COLUMNS = ["model", "alpha", "beta", "mu", "status", "rate", "zeta_value", "zeta_err",
                  "zeta_argmin_err", "geom_value", "geom_err", "geom_argmin_err", "detail"]

TABLE1 = dict(model=Model.BINARY, beta=0.22933, mu=None, alphas=[0.30, 0.35, 0.40, 0.45, 0.50])
TABLE3 = dict(model=Model.BOX, beta=0.18469, mu=0.85, alphas=[0.40, 0.45, 0.50, 0.55, 0.60])
# (alpha, n, m, k) per column; beta and mu are the tables' nominal values
TABLE2 = dict(model=Model.BINARY, beta=0.22933, mu=None,
              cells=[(0.30, 140, 42, 32), (0.35, 300, 105, 69), (0.40, 300, 120, 69),
                     (0.45, 300, 135, 69), (0.50, 140, 70, 32)])
TABLE4 = dict(model=Model.BOX, beta=0.18469, mu=0.85,
              cells=[(0.40, 125, 50, 23), (0.45, 300, 135, 55), (0.50, 300, 150, 55),
                     (0.55, 300, 165, 55), (0.60, 125, 75, 23)])


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise SystemExit(f"{name}={raw!r} is not an integer")


def parse_grid(text: str) -> list[float]:
    """``lo:hi:step`` (inclusive, rounded to 10 digits) or a comma list."""
    text = text.strip()
    if ":" in text:
        parts = [float(t) for t in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0:
            raise argparse.ArgumentTypeError("grid must be lo:hi:step with step > 0")
        lo, hi, step = parts
        count = int(math.floor((hi - lo) / step + 1e-9)) + 1
        return [round(lo + i * step, 10) for i in range(count)]
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _check_model(args) -> Model:
    model = Model.parse(args.model)
    if model is Model.BOX and args.mu is None:
        raise SystemExit("--mu is required for the box model")
    if args.mu is not None and not 0.5 < args.mu <= 1.0:
        raise SystemExit(f"--mu must lie in (1/2, 1], got {args.mu}")
    return model


def _emit(args, command: str, columns: Sequence[str], rows: list[dict], extra: dict | None = None):
    if args.format == "json":
        payload = {"schema_version": SCHEMA_VERSION, "command": command, "columns": list(columns),
                   "rows": rows}
        if extra:
            payload.update(extra)
        dump_json(payload, args.out)
    else:
        write_rows(rows, args.out, columns)


# pt

_GNUPLOT = """# gnuplot script for {data}
set datafile separator ','
set xlabel 'alpha'
set ylabel 'beta'
set xrange [0:1]
set key top left
set grid
plot '{data}' using 1:2 every ::1 with lines lw 2 title '{title}'
"""


def cmd_pt(args) -> int:
    model = _check_model(args)
    grid = args.alpha_grid
    if grid is None:
        grid = parse_grid("0.02:0.48:0.02") if model is Model.BINARY else parse_grid("0.16:0.98:0.02")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        curve = pt_curve(model, args.mu, grid)
    rows = [{"alpha": p.alpha, "beta": p.beta, "mu": p.mu} for p in curve]
    for a, why in curve.skipped:
        print(f"SKIPPED alpha={a}: {why}", file=sys.stderr)
    _emit(args, "pt", PT_COLUMNS, rows,
          {"model": model.value, "mu": args.mu, "skipped": [{"alpha": a, "reason": r} for a, r in curve.skipped]})
    if args.out and args.format == "csv":
        title = "binary" if model is Model.BINARY else f"box, mu={args.mu}"
        script = Path(args.out).with_suffix(".gp")
        script.write_text(_GNUPLOT.format(data=Path(args.out).name, title=title))
    return 0


# ldp

def _ldp_rows(model: Model, beta: float, mu: float | None, alphas: Sequence[float]) -> list[dict]:
    rows = []
    for a in alphas:
        row = {"alpha": a, "beta": beta, "mu": mu}
        try:
            sol = solve_ldp(ModelParams(a, beta, mu, model))
            row.update(sol.as_row())
            row["error"] = None
        except (DomainError, BracketError) as exc:
            row["error"] = str(exc)
        rows.append(row)
    return rows


def cmd_ldp(args) -> int:
    if args.table1 or args.table3:
        preset = TABLE1 if args.table1 else TABLE3
        model, beta, mu, alphas = preset["model"], preset["beta"], preset["mu"], preset["alphas"]
    else:
        model = _check_model(args)
        if args.beta is None:
            raise SystemExit("--beta is required without a table preset")
        beta, mu = args.beta, args.mu
        alphas = args.alpha_grid or parse_grid(f"{beta + 0.01:.4f}:0.7:0.01")
    rows = _ldp_rows(model, beta, mu, alphas)
    for r in rows:
        if r["error"]:
            print(f"SKIPPED alpha={r['alpha']}: {r['error']}", file=sys.stderr)
    _emit(args, "ldp", LDP_COLUMNS, rows, {"model": model.value, "beta": beta, "mu": mu})
    return 0


# verify

def default_verify_grid(model: Model) -> list[ModelParams]:
    """20 points per model straddling the transition on both sides."""
    offsets = [-0.08, -0.03, 0.0, 0.03, 0.08]
    pts = []
    if model is Model.BINARY:
        settings = [(b, None) for b in (0.1, 0.2, 0.3, 0.4)]
    else:
        settings = [(b, mu) for mu in (0.7, 0.85) for b in (0.1, 0.2)]
    for beta, mu in settings:
        aw = pt_alpha(beta, model, mu)
        for off in offsets:
            pts.append(ModelParams(round(aw + off, 6), beta, mu, model))
    return pts


def verify_point(alpha: float, beta: float, mu: float | None, model: Model) -> dict:
    row = {"model": model.value, "alpha": alpha, "beta": beta, "mu": mu}
    try:
        p = ModelParams(alpha, beta, mu, model)
        sol = solve_ldp(p)
        z = minimize_zeta_prob(p)
        g = solve_geom(p)
    except (DomainError, BracketError) as exc:
        row.update(status="SKIPPED", detail=str(exc))
        return row
    z_arg = max(abs(z.c3 - sol.c3), abs(z.nu - sol.nu), abs(z.a0 - sol.a0))
    g_arg = max(abs(g.y_i - sol.y2), abs(g.y_e - sol.y1), abs(g.gamma_g - sol.gamma_g))
    row.update(rate=sol.rate, zeta_value=z.value, zeta_err=abs(z.value - sol.rate),
               zeta_argmin_err=z_arg, geom_value=g.psi_net, geom_err=abs(g.psi_net - sol.rate),
               geom_argmin_err=g_arg, detail="")
    ok = (row["zeta_err"] <= VALUE_TOL and row["geom_err"] <= VALUE_TOL
          and z_arg <= ARGMIN_TOL and g_arg <= ARGMIN_TOL)
    row["status"] = "PASS" if ok else "FAIL"
    return row


def _points_from_args(args) -> list[tuple]:
    models = [Model.BINARY, Model.BOX] if args.model == "both" else [Model.parse(args.model)]
    if args.alpha_grid is None and args.beta is None:
        return [(p.alpha, p.beta, p.mu, p.model) for m in models for p in default_verify_grid(m)]
    if args.model == "both":
        raise SystemExit("an explicit grid needs a single --model")
    model = _check_model(args)
    if args.beta is None or args.alpha_grid is None:
        raise SystemExit("an explicit grid needs both --beta and --alpha-grid")
    return [(a, args.beta, args.mu, model) for a in args.alpha_grid]


def cmd_verify(args) -> int:
    points = _points_from_args(args)
    rows = [verify_point(*pt) for pt in points]
    for r in rows:
        if r["status"] == "SKIPPED":
            print(f"SKIPPED {r['model']} alpha={r['alpha']} beta={r['beta']}: {r['detail']}", file=sys.stderr)
    checked = [r for r in rows if r["status"] != "SKIPPED"]
    failed = [r for r in checked if r["status"] == "FAIL"]
    worst = max(checked, key=lambda r: max(r["zeta_err"], r["geom_err"]), default=None)
    verdict = "PASS" if not failed else "FAIL"
    summary = {"verdict": verdict, "checked": len(checked), "skipped": len(rows) - len(checked),
               "failed": len(failed)}
    if worst is not None:
        summary["worst"] = {k: worst[k] for k in ("model", "alpha", "beta", "mu", "zeta_err", "geom_err")}
    _emit(args, "verify", VERIFY_COLUMNS, rows, {"summary": summary})
    msg = f"{verdict}: {len(checked)} checked, {len(rows) - len(checked)} skipped, {len(failed)} failed"
    if worst is not None:
        msg += (f"; worst value error {max(worst['zeta_err'], worst['geom_err']):.2e} at "
                f"{worst['model']} alpha={worst['alpha']} beta={worst['beta']}")
    print(msg, file=sys.stderr)
    return 0 if not failed else 1


# simulate

def cmd_simulate(args) -> int:
    if args.table2 or args.table4:
        preset = TABLE2 if args.table2 else TABLE4
        model, beta, mu = preset["model"], preset["beta"], preset["mu"]
        cells = [(a, beta, n, m, k) for a, n, m, k in preset["cells"]]
    else:
        model = _check_model(args)
        if None in (args.n, args.m, args.k):
            raise SystemExit("--n, --m and --k are required without a table preset")
        mu = args.mu
        cells = [(args.alpha, args.beta, args.n, args.m, args.k)]
    from .linalg_lp import dims_for
    from .montecarlo import CSV_COLUMNS, estimate_row, run_manifest, run_trials

    rows = []
    t0 = time.perf_counter()
    for i, (alpha, beta, n, m, k) in enumerate(cells):
        try:
            dims = dims_for(n, m, k, model, mu)
        except ValueError as exc:
            raise SystemExit(f"bad dimensions: {exc}")
        # one seed stream per cell keeps cells independent of each other
        est = run_trials(dims, model, mu, args.trials, args.seed + 1000003 * i, args.method,
                         args.threads, args.interior_value)
        rows.append(estimate_row(est, alpha, beta))
        if est.errors:
            print(f"cell n={n} m={m} k={k}: {est.errors} solver errors", file=sys.stderr)
    manifest = run_manifest(args.seed, args.method,
                            {"model": model.value, "trials": args.trials, "threads": args.threads,
                             "interior_value": args.interior_value,
                             "seconds": round(time.perf_counter() - t0, 3)})
    _emit(args, "simulate", CSV_COLUMNS, rows, {"manifest": manifest})
    if args.out and args.format == "csv":
        dump_json(manifest, Path(args.out).with_suffix(".manifest.json"))
    return 0


# parser

def _globals(parser: argparse.ArgumentParser, suppress: bool):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    g = parser.add_argument_group("global options")
    g.add_argument("--seed", type=int, default=d(_env_int("BOXL1_SEED", 20240601)),
                   help="base seed (env BOXL1_SEED)")
    g.add_argument("--threads", type=int, default=d(_env_int("BOXL1_THREADS", 1)),
                   help="worker processes for simulate (env BOXL1_THREADS)")
    g.add_argument("--format", choices=["csv", "json"], default=d(os.environ.get("BOXL1_FORMAT", "csv")),
                   help="output format (env BOXL1_FORMAT)")
    g.add_argument("--out", default=d(None), help="output file; stdout when omitted")


def _model_args(p: argparse.ArgumentParser, choices=("binary", "bin", "box")):
    p.add_argument("--model", default="binary", choices=list(choices))
    p.add_argument("--mu", type=float, default=None, help="fraction of off-support zeros (box)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="boxl1", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _globals(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pt", help="weak phase-transition curve")
    _model_args(p)
    p.add_argument("--alpha-grid", type=parse_grid, default=None, help="lo:hi:step or a comma list")
    _globals(p, suppress=True)
    p.set_defaults(func=cmd_pt)

    p = sub.add_parser("ldp", help="closed-form LDP solution over an alpha grid")
    _model_args(p)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--alpha-grid", type=parse_grid, default=None)
    tbl = p.add_mutually_exclusive_group()
    tbl.add_argument("--table1", action="store_true", help="binary grid, beta = 0.22933")
    tbl.add_argument("--table3", action="store_true", help="box grid, beta = 0.18469, mu = 0.85")
    _globals(p, suppress=True)
    p.set_defaults(func=cmd_ldp)

    p = sub.add_parser("verify", help="closed form against both numeric oracles")
    _model_args(p, choices=("binary", "bin", "box", "both"))
    p.set_defaults(model="both")
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--alpha-grid", type=parse_grid, default=None)
    _globals(p, suppress=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", help="Monte Carlo decay-rate estimates")
    _model_args(p)
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--alpha", type=float, default=None, help="nominal alpha for the theory column")
    p.add_argument("--beta", type=float, default=None, help="nominal beta for the theory column")
    p.add_argument("--trials", type=int, default=_env_int("BOXL1_TRIALS", 1000))
    p.add_argument("--method", choices=["lp", "nullspace"], default="lp")
    p.add_argument("--interior-value", type=float, default=None,
                   help="constant value for box interior entries (default: uniform(0,1) draws)")
    tbl = p.add_mutually_exclusive_group()
    tbl.add_argument("--table2", action="store_true", help="the five binary configurations")
    tbl.add_argument("--table4", action="store_true", help="the five box configurations")
    _globals(p, suppress=True)
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "trials", 1) < 1:
        parser.error("--trials must be at least 1")
    if args.threads < 1:
        parser.error("--threads must be at least 1")
    iv = getattr(args, "interior_value", None)
    if iv is not None and not 0.0 < iv < 1.0:
        parser.error("--interior-value must lie in (0, 1)")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
