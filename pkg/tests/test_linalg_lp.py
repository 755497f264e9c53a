import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from boxl1.linalg_lp import (InstanceDims, LpError, LpInfeasible, ProblemInstance, Tag, dims_for,
                             gen_instance, instance_for, load_instance, null_space_failure,
                             recovered, save_instance, solve_box_l1, solve_lp)
from boxl1.params import Model, ModelParams


def test_dims_binary_and_box():
    d = dims_for(300, 120, 69, Model.BINARY)
    assert (d.n_zero, d.n_one) == (231, 69)
    d = dims_for(300, 150, 55, Model.BOX, 0.85)
    assert d.n_zero == 208  # round(0.85 * 245) = round(208.25)
    assert d.n_zero + d.n_one + d.k == 300


@pytest.mark.parametrize("args", [(10, 11, 2), (10, 5, 6), (10, 5, -1)])
def test_dims_invalid(args):
    with pytest.raises(ValueError):
        dims_for(*args, Model.BINARY)


def test_box_dims_need_mu():
    with pytest.raises(ValueError):
        dims_for(10, 5, 2, Model.BOX)
    with pytest.raises(ValueError):
        InstanceDims(10, 5, 2, 3, 3)


def test_binary_instance_contents():
    inst = gen_instance(dims_for(300, 120, 69, Model.BINARY), Model.BINARY, seed=1)
    assert inst.a_matrix.shape == (120, 300)
    assert int(inst.x_true.sum()) == 69
    assert set(np.unique(inst.x_true)) == {0.0, 1.0}
    assert np.array_equal(inst.y_vec, inst.a_matrix @ inst.x_true)
    assert np.array_equal(inst.pattern == Tag.ONE, inst.x_true == 1.0)


def test_box_instance_contents():
    inst = gen_instance(dims_for(300, 150, 55, Model.BOX, 0.85), Model.BOX, 0.85, seed=1)
    assert np.count_nonzero(inst.pattern == Tag.ZERO) == 208
    assert np.count_nonzero(inst.pattern == Tag.ONE) == 37
    vals = inst.x_true[inst.pattern == Tag.INTERIOR]
    assert vals.size == 55 and np.all((vals > 0) & (vals < 1))
    const = gen_instance(dims_for(40, 20, 5, Model.BOX, 0.85), Model.BOX, 0.85, seed=1,
                         interior_value=0.5)
    assert np.all(const.x_true[const.pattern == Tag.INTERIOR] == 0.5)
    with pytest.raises(ValueError):
        gen_instance(dims_for(40, 20, 5, Model.BOX, 0.85), Model.BOX, 0.85, seed=1, interior_value=1.0)


def test_instances_are_deterministic():
    d = dims_for(50, 20, 5, Model.BOX, 0.7)
    a = gen_instance(d, Model.BOX, 0.7, seed=(7, 3))
    b = gen_instance(d, Model.BOX, 0.7, seed=(7, 3))
    c = gen_instance(d, Model.BOX, 0.7, seed=(7, 4))
    assert np.array_equal(a.a_matrix, b.a_matrix) and np.array_equal(a.x_true, b.x_true)
    assert not np.array_equal(a.a_matrix, c.a_matrix)


def test_zero_vector_recovered():
    inst = gen_instance(dims_for(30, 10, 0, Model.BINARY), Model.BINARY, seed=3)
    x = solve_box_l1(inst)
    assert np.abs(x).max() <= 1e-9


@pytest.mark.parametrize("model,mu", [(Model.BINARY, None), (Model.BOX, 0.7)])
def test_square_system_recovers(model, mu):
    inst = gen_instance(dims_for(20, 20, 6, model, mu), model, mu, seed=5)
    assert recovered(inst, solve_box_l1(inst))
    assert null_space_failure(inst) is False


def _vertex_enumeration(a, y):
    """Brute-force min of sum(x) over A x = y, 0 <= x <= 1 by visiting
    every basis and every bound assignment of the nonbasic columns."""
    m, n = a.shape
    best, arg = np.inf, None
    for basis in itertools.combinations(range(n), m):
        basis = list(basis)
        sub = a[:, basis]
        if abs(np.linalg.det(sub)) < 1e-10:
            continue
        rest = [j for j in range(n) if j not in basis]
        for bits in itertools.product((0.0, 1.0), repeat=len(rest)):
            x = np.zeros(n)
            x[rest] = bits
            x[basis] = np.linalg.solve(sub, y - a[:, rest] @ np.array(bits))
            if x.min() >= -1e-9 and x.max() <= 1 + 1e-9 and x.sum() < best - 1e-12:
                best, arg = x.sum(), x
    return best, arg


def test_tiny_binary_instance_against_vertex_enumeration():
    inst = gen_instance(dims_for(10, 7, 2, Model.BINARY), Model.BINARY, seed=2024)
    best, arg = _vertex_enumeration(inst.a_matrix, inst.y_vec)
    x = solve_box_l1(inst)
    assert x.sum() == pytest.approx(best, abs=1e-9)
    assert np.allclose(arg, inst.x_true, atol=1e-8)
    assert recovered(inst, x)
    res = solve_lp(np.ones(10), inst.a_matrix, inst.y_vec, np.zeros(10), np.ones(10))
    assert abs(res.gap) <= 1e-9 * (1 + abs(res.objective))


def _highs(c, a, b, lo, hi):
    bounds = [(l, None if not np.isfinite(h) else h) for l, h in zip(lo, hi)]
    return linprog(c, A_eq=a, b_eq=b, bounds=bounds, method="highs")


@settings(max_examples=40)
@given(st.integers(0, 10_000), st.integers(2, 8), st.integers(1, 12))
def test_solve_lp_matches_highs(seed, m, extra):
    rng = np.random.default_rng(seed)
    n = m + extra
    a = rng.standard_normal((m, n))
    x0 = rng.uniform(0, 1, n)
    b = a @ x0
    c = rng.standard_normal(n)
    lo, hi = np.zeros(n), np.ones(n)
    ref = _highs(c, a, b, lo, hi)
    res = solve_lp(c, a, b, lo, hi)
    assert ref.status == 0
    assert res.objective == pytest.approx(ref.fun, abs=1e-7 * (1 + abs(ref.fun)))
    assert res.gap <= 1e-9 * (1 + abs(res.objective))
    assert np.abs(a @ res.x - b).max() <= 1e-8
    assert res.x.min() >= 0 and res.x.max() <= 1


@settings(max_examples=20)
@given(st.integers(0, 10_000))
def test_solve_lp_unbounded_above_matches_highs(seed):
    # nonnegative orthant with a bounded objective (positive costs)
    rng = np.random.default_rng(seed)
    m, n = 4, 9
    a = rng.standard_normal((m, n))
    b = a @ rng.uniform(0, 2, n)
    c = rng.uniform(0.1, 1.0, n)
    lo, hi = np.zeros(n), np.full(n, np.inf)
    ref = _highs(c, a, b, lo, hi)
    res = solve_lp(c, a, b, lo, hi)
    assert res.objective == pytest.approx(ref.fun, abs=1e-7 * (1 + abs(ref.fun)))


def test_infeasible_lp():
    a = np.ones((1, 3))
    with pytest.raises(LpInfeasible):
        solve_lp(np.ones(3), a, np.array([5.0]), np.zeros(3), np.ones(3))


def test_empty_bounds_rejected():
    with pytest.raises(LpError):
        solve_lp(np.ones(2), np.ones((1, 2)), np.array([1.0]), np.array([0.0, 1.0]), np.array([1.0, 0.0]))


@pytest.mark.parametrize("model,mu", [(Model.BINARY, None), (Model.BOX, 0.85)])
def test_post_conditions_on_random_instances(model, mu):
    for s in range(15):
        inst = gen_instance(dims_for(60, 30, 8, model, mu), model, mu, seed=s)
        x = solve_box_l1(inst)
        assert np.abs(inst.a_matrix @ x - inst.y_vec).max() <= 1e-9 * (1 + np.abs(inst.y_vec).max()) * 1e3
        assert x.min() >= 0.0 and x.max() <= 1.0
        assert x.sum() <= inst.x_true.sum() + 1e-9 * 60


def test_cold_and_warm_start_agree():
    for s in range(10):
        inst = gen_instance(dims_for(60, 25, 10, Model.BOX, 0.8), Model.BOX, 0.8, seed=s)
        xw = solve_box_l1(inst, warm=True)
        xc = solve_box_l1(inst, warm=False)
        assert xw.sum() == pytest.approx(xc.sum(), abs=1e-8)
        assert recovered(inst, xw) == recovered(inst, xc)


def _permuted(inst, perm):
    a = inst.a_matrix[:, perm]
    x = inst.x_true[perm]
    return ProblemInstance(a, x, a @ x, inst.pattern[perm], model=inst.model)


@pytest.mark.parametrize("model,mu", [(Model.BINARY, None), (Model.BOX, 0.85)])
def test_success_invariant_under_permutation(model, mu):
    rng = np.random.default_rng(99)
    for s in range(12):
        inst = gen_instance(dims_for(60, 28, 9, model, mu), model, mu, seed=s)
        perm = rng.permutation(60)
        other = _permuted(inst, perm)
        assert recovered(inst, solve_box_l1(inst)) == recovered(other, solve_box_l1(other))
        assert null_space_failure(inst) == null_space_failure(other)


@pytest.mark.parametrize("model,mu,alpha,beta", [(Model.BINARY, None, 0.40, 0.22933),
                                                 (Model.BOX, 0.85, 0.50, 0.18469)])
def test_null_space_agrees_with_lp(model, mu, alpha, beta):
    params = ModelParams(alpha, beta, mu, model)
    agree = 0
    outcomes = set()
    for s in range(60):
        inst = instance_for(params, 60, (123, s))
        fail_lp = not recovered(inst, solve_box_l1(inst))
        fail_ns = null_space_failure(inst)
        agree += fail_lp == fail_ns
        outcomes.add(fail_lp)
    assert outcomes == {True, False}  # the grid point straddles the transition
    assert agree >= 59


def test_null_space_far_above_transition():
    params = ModelParams.binary(0.8, 0.1)
    fails = sum(null_space_failure(instance_for(params, 60, (5, s))) for s in range(20))
    assert fails == 0


def test_null_space_far_below_transition():
    # beta_w(0.2) is about 0.067; at n = 60 an odd success is still possible
    params = ModelParams.binary(0.2, 0.15)
    fails = 0
    for s in range(20):
        inst = instance_for(params, 60, (6, s))
        ns = null_space_failure(inst)
        assert ns == (not recovered(inst, solve_box_l1(inst)))
        fails += ns
    assert fails >= 18


def test_save_load_round_trip(tmp_path):
    inst = gen_instance(dims_for(12, 6, 3, Model.BOX, 0.7), Model.BOX, 0.7, seed=4)
    inst.meta["note"] = "archived"
    csv_path, json_path = save_instance(inst, tmp_path / "case")
    assert csv_path.exists() and json_path.exists()
    back = load_instance(tmp_path / "case")
    assert np.array_equal(back.a_matrix, inst.a_matrix)
    assert np.array_equal(back.x_true, inst.x_true)
    assert np.array_equal(back.pattern, inst.pattern)
    assert back.seed == 4 and back.model is Model.BOX and back.meta == {"note": "archived"}
