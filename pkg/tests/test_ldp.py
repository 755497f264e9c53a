import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from boxl1.analytic_pt import pt_alpha
from boxl1.ldp_analytic import (Tail, f1_bin, f1_box, f1_pair, fixed_point_ratio,
                                fixed_point_residual, rate_curve, rate_function, solve_ldp)
from boxl1.params import DomainError, Model, ModelParams
from boxl1.search import BracketError
from boxl1.specfun import SQRT_PI, erf, erfcx

from published import LDP_BINARY as TABLE1
from published import LDP_BOX as TABLE3
from published import LDP_FIELDS as FIELDS


def _check_column(sol, expected, tol=5e-4):
    for name, want in zip(FIELDS, expected):
        assert getattr(sol, name) == pytest.approx(want, abs=tol), name


@pytest.mark.parametrize("alpha", sorted(TABLE1))
def test_table1_column(alpha):
    _check_column(solve_ldp(ModelParams.binary(alpha, 0.22933)), TABLE1[alpha])


@pytest.mark.parametrize("alpha", sorted(TABLE3))
def test_table3_column(alpha):
    _check_column(solve_ldp(ModelParams.box(alpha, 0.18469, 0.85)), TABLE3[alpha])


def test_f1_at_zero():
    assert f1_bin(0.0, 0.4, 0.2) == 0.0
    assert f1_box(0.0, 0.4, 0.2, 0.8) == 0.0


def test_f1_derived_values():
    # at the PT point f1(y2) = y e^{y^2} erfc(-y) with y = y1 = y2; values from mpmath
    assert f1_bin(0.3401, 0.40, 0.22933) == pytest.approx(0.5228, abs=5e-4)
    assert f1_bin(0.3401, 0.40, 0.22933) == pytest.approx(0.522834371167, abs=1e-10)
    assert f1_box(0.2951, 0.50, 0.18469, 0.85) == pytest.approx(0.426180448022, abs=1e-10)
    y = 0.2951
    assert f1_box(y, 0.50, 0.18469, 0.85) == pytest.approx(y * erfcx(-y), abs=5e-4)


def test_f1_overflow_guard():
    with pytest.raises(DomainError):
        f1_bin(26.0, 0.4, 0.2)
    with pytest.raises(DomainError):
        f1_box(-30.0, 0.4, 0.2, 0.8)


@pytest.mark.parametrize("y2,params", [
    (0.3401, ModelParams.binary(0.40, 0.22933)),
    (0.2431, ModelParams.binary(0.30, 0.22933)),
    (0.4432, ModelParams.binary(0.50, 0.22933)),
    (0.3904, ModelParams.box(0.60, 0.18469, 0.85)),
    (0.1994, ModelParams.box(0.40, 0.18469, 0.85)),
])
def test_fixed_point_residual_at_table_values(y2, params):
    # four printed digits of y2 leave a residual of order 1e-4 / y2
    assert abs(fixed_point_residual(y2, params)) <= 1e-3


def test_fixed_point_residual_domain():
    p = ModelParams.binary(0.4, 0.22933)
    with pytest.raises(DomainError):
        fixed_point_residual(0.0, p)
    with pytest.raises(DomainError):
        fixed_point_residual(10.0, p)  # ratio rounds to -1


def _grid_points():
    pts = []
    for beta in (0.05, 0.15, 0.22933, 0.3, 0.4):
        aw = pt_alpha(beta)
        for d in (-0.06, -0.02, 0.02, 0.06):
            if beta < aw + d:
                pts.append(ModelParams.binary(aw + d, beta))
    for mu in (0.6, 0.75, 0.85, 0.95):
        for beta in (0.05, 0.18469):
            aw = pt_alpha(beta, Model.BOX, mu)
            for d in (-0.06, -0.02, 0.02, 0.06):
                if beta < aw + d:
                    pts.append(ModelParams.box(aw + d, beta, mu))
    return pts


GRID = _grid_points()


@pytest.mark.parametrize("p", GRID, ids=lambda p: f"{p.model.value}-{p.mu}-{p.beta}-{p.alpha:.4f}")
def test_solution_identities(p):
    s = solve_ldp(p)
    assert abs(fixed_point_residual(s.y2, p)) <= 1e-10
    assert abs(erf(s.y1) - fixed_point_ratio(s.y2, p)) <= 1e-10
    assert s.a0 * s.y2 == pytest.approx(s.y1, abs=1e-12)
    assert s.nu == pytest.approx(math.sqrt(2) * s.y1, abs=1e-12)
    sa = math.sqrt(p.alpha)
    assert s.c3 == pytest.approx((1 - s.a0**2) * sa / s.a0, abs=1e-12)
    assert s.gamma == pytest.approx(sa / (2 * s.a0), abs=1e-12)
    # the printed form c3 / (2 (1 - A0^2)) agrees away from the transition
    assert s.gamma == pytest.approx(s.c3 / (2 * (1 - s.a0**2)), rel=1e-10)
    assert s.rate < 0


@pytest.mark.parametrize("p", GRID, ids=lambda p: f"{p.model.value}-{p.mu}-{p.beta}-{p.alpha:.4f}")
def test_tail_sign_law(p):
    s = solve_ldp(p)
    aw = pt_alpha(p.beta, p.model, p.mu)
    assert np.sign(s.c3) == np.sign(p.alpha - aw)
    if s.tail is Tail.UPPER:
        assert s.c3 > 0 and s.y2 > s.y1
    else:
        assert s.tail is Tail.LOWER
        assert s.c3 < 0 and s.y1 > s.y2


def _pt_cases(seed, model, n=10):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        if model is Model.BINARY:
            beta, mu = float(rng.uniform(0.02, 0.45)), None
        else:
            beta, mu = float(rng.uniform(0.02, 0.35)), float(rng.uniform(0.6, 0.97))
        try:
            out.append((beta, mu, pt_alpha(beta, model, mu)))
        except (DomainError, BracketError):
            continue
    return out


@pytest.mark.parametrize("model", [Model.BINARY, Model.BOX])
def test_pt_recovery(model):
    for beta, mu, aw in _pt_cases(11, model):
        p = ModelParams(aw, beta, mu, model)
        s = solve_ldp(p)
        assert abs(s.y1 - s.y2) <= 1e-8
        assert abs(s.rate) <= 1e-10
        y = s.y2
        lhs = SQRT_PI * y * erfcx(-y)
        if model is Model.BINARY:
            rhs = (1 - beta) / aw - 1
        else:
            rhs = (mu * (1 - beta) + beta - aw) / aw
        assert lhs == pytest.approx(rhs, abs=1e-8)
        # symmetry bridge: erfc(-y) + erfc(y) = 2 carried through the scaled groups
        assert y * erfcx(-y) + y * erfcx(y) == pytest.approx(2 * y * math.exp(y * y), rel=1e-14)


@pytest.mark.parametrize("beta,mu,model", [(0.22933, None, "binary"), (0.1, None, "binary"),
                                           (0.18469, 0.85, "box"), (0.1, 0.7, "box")])
def test_rate_decreases_away_from_transition(beta, mu, model):
    aw = pt_alpha(beta, model, mu)
    for side in (-1, 1):
        steps = [aw + side * d for d in np.linspace(0.005, 0.08, 12)]
        rates = [rate_function(ModelParams(a, beta, mu, model)) for a in steps]
        assert all(r < 0 for r in rates)
        assert all(r2 < r1 for r1, r2 in zip(rates, rates[1:]))


def test_rate_function_examples():
    assert rate_function(ModelParams.binary(0.50, 0.22933)) == pytest.approx(-0.0223, abs=5e-4)
    assert rate_function(ModelParams.box(0.45, 0.18469, 0.85)) == pytest.approx(-0.0069, abs=5e-4)
    aw = pt_alpha(0.3)
    assert abs(rate_function(ModelParams.binary(aw, 0.3))) <= 1e-8


def test_rate_curve_rows():
    rows = rate_curve(0.22933, None, "binary", [0.30, 0.35, 0.40, 0.45, 0.50])
    got = [r["rate"] for r in rows]
    assert got == pytest.approx([-0.0234, -0.0058, 0.0, -0.0056, -0.0223], abs=5e-4)
    rows = rate_curve(0.18469, 0.85, "box", [0.40, 0.45, 0.50, 0.55, 0.60])
    assert [r["rate"] for r in rows] == pytest.approx([-0.0284, -0.0069, 0.0, -0.0066, -0.0262], abs=5e-4)


def test_rate_curve_apex_at_transition():
    beta = 1.0 / 3.0
    aw = pt_alpha(beta)
    grid = list(np.linspace(aw - 0.1, aw + 0.1, 41)) + [aw]
    rows = [r for r in rate_curve(beta, None, "binary", grid) if r["error"] is None]
    best = max(rows, key=lambda r: r["rate"])
    assert best["alpha"] == aw
    assert abs(best["rate"]) <= 1e-10


def test_rate_curve_records_failures():
    rows = rate_curve(0.3, None, "binary", [0.2, 0.4])
    assert rows[0]["error"] and rows[1]["error"] is None


def test_transition_classification():
    aw = pt_alpha(0.2)
    s = solve_ldp(ModelParams.binary(aw, 0.2))
    assert s.tail is Tail.AT_TRANSITION
    assert s.as_row()["tail"] == "at_transition"


@settings(max_examples=25)
@given(st.floats(0.05, 0.4), st.floats(0.01, 0.1))
def test_pair_partner_is_consistent(beta, dy):
    # the partner term is f1 at -y2 with beta -> 1 - beta (binary)
    p = ModelParams.binary(min(beta + 0.1, 0.49), beta)
    y = 0.3 + dy
    a, b = f1_pair(y, p)
    assert a == f1_bin(y, p.alpha, beta)
    assert b == f1_bin(-y, p.alpha, 1 - beta)


def test_mu_near_one_not_representable():
    # the (1 - mu) partner weight vanishes; the fixed point leaves (-1, 1)
    with pytest.raises((BracketError, DomainError)):
        solve_ldp(ModelParams.box(0.2, 0.05, 1.0))
    # mu = 0.99 is still solved, root next to the edge of the admissible window
    aw = pt_alpha(0.05, Model.BOX, 0.99)
    s = solve_ldp(ModelParams.box(aw, 0.05, 0.99))
    assert abs(s.rate) <= 1e-10
