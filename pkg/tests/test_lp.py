import math

import numpy as np
import pytest

from dtwdro.config import SolverTolerances
from dtwdro.lp import EQ, GE, INF, LE, LinearProgram, MixedIntegerProgram, Status, solve_lp, solve_mip

from oracles import binary_brute_force, lp_vertex_optimum


def build(c, A_ub=(), b_ub=(), A_eq=(), b_eq=(), lb=None, ub=None, sense="min"):
    n = len(c)
    lp = LinearProgram(sense)
    lb = [0.0] * n if lb is None else lb
    ub = [INF] * n if ub is None else ub
    for j in range(n):
        lp.add_var(lb=lb[j], ub=ub[j], obj=c[j])
    for row, rhs in zip(A_ub, b_ub):
        lp.add_row({j: v for j, v in enumerate(row) if v}, LE, rhs)
    for row, rhs in zip(A_eq, b_eq):
        lp.add_row({j: v for j, v in enumerate(row) if v}, EQ, rhs)
    return lp


def random_bounded_lp(rng):
    n = int(rng.integers(1, 7))
    m = int(rng.integers(1, 6))
    m_eq = int(rng.integers(0, min(m, n) + 1)) if rng.random() < 0.4 else 0
    c = rng.integers(-5, 6, n).astype(float)
    A = rng.integers(-4, 5, (m, n)).astype(float)
    x0 = rng.uniform(0, 2, n)
    slack = rng.uniform(-0.5, 2, m)            # negative slack -> possibly infeasible
    b = A @ x0 + slack
    lb = rng.integers(-2, 1, n).astype(float)
    ub = lb + rng.integers(1, 5, n)
    A_eq, b_eq = A[:m_eq], A[:m_eq] @ x0
    return dict(c=c, A_ub=A[m_eq:], b_ub=b[m_eq:], A_eq=A_eq, b_eq=b_eq, lb=lb, ub=ub,
                sense="min" if rng.random() < 0.5 else "max")


# -- examples -----------------------------------------------------------------

def test_max_single_var():
    lp = LinearProgram("max")
    x = lp.add_var("x", obj=1.0)
    lp.add_row({x: 1.0}, LE, 3.0)
    res = solve_lp(lp)
    assert res.status == Status.OPTIMAL
    assert res.x[0] == pytest.approx(3.0) and res.objective == pytest.approx(3.0)


def test_degenerate_split_is_deterministic():
    lp = LinearProgram("min")
    x, y = lp.add_var(ub=10, obj=1.0), lp.add_var(ub=10, obj=1.0)
    lp.add_row({x: 1.0, y: 1.0}, GE, 2.0)
    a, b = solve_lp(lp), solve_lp(lp)
    assert a.objective == pytest.approx(2.0)
    assert a.x.sum() == pytest.approx(2.0)
    assert np.array_equal(a.x, b.x) and a.iterations == b.iterations


def test_knapsack():
    mip = MixedIntegerProgram(LinearProgram("max"))
    xs = [mip.add_binary(f"x{i}", obj=v) for i, v in enumerate((10, 6, 4))]
    mip.lp.add_row(dict(zip(xs, (5, 4, 3))), LE, 9)
    res = solve_mip(mip)
    assert res.status == Status.OPTIMAL
    assert res.objective == pytest.approx(16.0)
    assert res.x.tolist() == [1.0, 1.0, 0.0]
    assert res.bound >= res.objective - 1e-9


def test_totally_unimodular_solved_at_root():
    rng = np.random.default_rng(5)
    K = 4
    cost = rng.integers(1, 9, (K, K))
    mip = MixedIntegerProgram(LinearProgram("min"))
    idx = [[mip.add_binary(obj=float(cost[i, j])) for j in range(K)] for i in range(K)]
    for i in range(K):
        mip.lp.add_row({idx[i][j]: 1.0 for j in range(K)}, EQ, 1.0)
        mip.lp.add_row({idx[j][i]: 1.0 for j in range(K)}, EQ, 1.0)
    res = solve_mip(mip, heuristic_every=0)
    assert res.nodes == 1
    assert res.objective == pytest.approx(solve_lp(mip.lp).objective)


def test_infeasible_and_unbounded():
    lp = LinearProgram()
    x = lp.add_var(ub=1.0)
    lp.add_row({x: 1.0}, GE, 2.0)
    assert solve_lp(lp).status == Status.INFEASIBLE
    lp = LinearProgram("max")
    x = lp.add_var(obj=1.0)
    y = lp.add_var()
    lp.add_row({x: 1.0, y: -1.0}, LE, 1.0)
    assert solve_lp(lp).status == Status.UNBOUNDED
    assert solve_lp(build([1.0], lb=[2.0], ub=[1.0])).status == Status.INFEASIBLE


def test_free_and_negative_bounds():
    lp = LinearProgram("min")
    x = lp.add_var(lb=-INF, ub=INF, obj=1.0)
    y = lp.add_var(lb=-5.0, ub=-1.0, obj=-2.0)
    lp.add_row({x: 1.0, y: 1.0}, GE, -3.0)
    res = solve_lp(lp)
    assert res.objective == pytest.approx(0.0, abs=1e-12)   # -3 - 3y at y = -1
    assert res.x.tolist() == pytest.approx([-2.0, -1.0])


def test_iteration_limit():
    rng = np.random.default_rng(0)
    n = 12
    A = rng.uniform(0.5, 2, (10, n))
    lp = build(-rng.uniform(1, 2, n), A, A.sum(axis=1))
    res = solve_lp(lp, SolverTolerances(max_iterations=1))
    assert res.status == Status.ITERATION_LIMIT
    assert solve_lp(lp).status == Status.OPTIMAL


def test_builder_validation():
    lp = LinearProgram()
    with pytest.raises(ValueError):
        LinearProgram("maximise")
    with pytest.raises(ValueError):
        lp.add_var(obj=math.nan)
    x = lp.add_var()
    with pytest.raises(IndexError):
        lp.add_row({x + 1: 1.0}, LE, 1.0)
    with pytest.raises(ValueError):
        lp.add_row({x: 1.0}, "<", 1.0)
    with pytest.raises(ValueError):
        lp.add_row({x: math.inf}, LE, 1.0)


def test_listing_has_one_line_per_row():
    lp = build([1.0, -2.0], [[1, 1], [2, -1]], [4, 1], sense="max")
    mip = MixedIntegerProgram(lp, [1])
    text = mip.listing()
    assert text.startswith("\\ model lp\nmaximize\n")
    assert "  r0: + 1 v0 + 1 v1 <= 4" in text
    assert "  r1: + 2 v0 - 1 v1 <= 1" in text
    assert "binary\n  v1\nend" in text


# -- oracle comparisons -------------------------------------------------------

@pytest.mark.parametrize("seed", range(60))
def test_simplex_matches_vertex_enumeration(seed):
    rng = np.random.default_rng(seed)
    inst = random_bounded_lp(rng)
    ref, _ = lp_vertex_optimum(**inst)
    res = solve_lp(build(**inst))
    if ref is None:
        assert res.status == Status.INFEASIBLE
    else:
        assert res.status == Status.OPTIMAL
        assert abs(res.objective - ref) <= 1e-8 * (1 + abs(ref))
        assert build(**inst).max_violation(res.x) <= 1e-7


@pytest.mark.parametrize("seed", range(30))
def test_branch_and_bound_matches_brute_force(seed):
    rng = np.random.default_rng(500 + seed)
    n = int(rng.integers(1, 13))
    m = int(rng.integers(1, 5))
    c = rng.integers(-3, 10, n).astype(float)
    A = rng.integers(-2, 8, (m, n)).astype(float)
    b = rng.integers(0, 4 * n, m).astype(float)
    ref, _ = binary_brute_force(c, A, b, "max")
    mip = MixedIntegerProgram(LinearProgram("max"))
    xs = [mip.add_binary(obj=float(v)) for v in c]
    for row, rhs in zip(A, b):
        mip.lp.add_row({xs[j]: float(v) for j, v in enumerate(row) if v}, LE, float(rhs))
    res = solve_mip(mip)
    if ref is None:
        assert res.status == Status.INFEASIBLE
        return
    assert res.status == Status.OPTIMAL
    assert res.objective == ref
    assert np.all(np.isin(res.x, (0.0, 1.0)))
    assert mip.lp.max_violation(res.x) <= 1e-9
    assert res.bound >= res.objective - 1e-6 * (1 + abs(ref))


def test_mip_with_continuous_part():
    # max 3a + 2b + t, t <= 1.5 + a - b, a + b <= 1, t in [0, 2]
    mip = MixedIntegerProgram(LinearProgram("max"))
    a, b = mip.add_binary(obj=3.0), mip.add_binary(obj=2.0)
    t = mip.lp.add_var(ub=2.0, obj=1.0)
    mip.lp.add_row({t: 1.0, a: -1.0, b: 1.0}, LE, 1.5)
    mip.lp.add_row({a: 1.0, b: 1.0}, LE, 1.0)
    res = solve_mip(mip)
    assert res.objective == pytest.approx(5.0)
    assert res.x.tolist() == pytest.approx([1.0, 0.0, 2.0])


def test_start_and_heuristic_do_not_change_optimum():
    rng = np.random.default_rng(77)
    n = 10
    c = rng.integers(1, 10, n).astype(float)
    w = rng.integers(1, 10, n).astype(float)
    mip = MixedIntegerProgram(LinearProgram("max"))
    xs = [mip.add_binary(obj=float(v)) for v in c]
    mip.lp.add_row(dict(zip(xs, w)), LE, float(w.sum() // 2))
    ref, _ = binary_brute_force(c, [w], [w.sum() // 2])
    bad_start = {j: 0.0 for j in xs}
    assert solve_mip(mip, start=bad_start).objective == ref
    assert solve_mip(mip, heuristic=lambda x: None).objective == ref
    # an infeasible start is silently ignored
    assert solve_mip(mip, start={j: 1.0 for j in xs}).objective == ref


def test_node_cap_reports_limit_with_incumbent():
    rng = np.random.default_rng(3)
    n = 12
    c = rng.integers(20, 30, n).astype(float)
    w = rng.integers(20, 30, n).astype(float)
    mip = MixedIntegerProgram(LinearProgram("max"))
    xs = [mip.add_binary(obj=float(v)) for v in c]
    mip.lp.add_row(dict(zip(xs, w)), LE, float(w.sum() / 2 + 0.5))
    res = solve_mip(mip, SolverTolerances(max_nodes=3), heuristic_every=0)
    if res.status == Status.ITERATION_LIMIT and res.x is not None:
        assert mip.lp.max_violation(res.x) <= 1e-9
        assert res.bound >= res.objective
    assert res.status in (Status.ITERATION_LIMIT, Status.OPTIMAL)
    assert res.nodes <= 5


# -- duals --------------------------------------------------------------------

@pytest.mark.parametrize("seed", range(25))
def test_duals_complementary_slackness_and_strong_duality(seed):
    rng = np.random.default_rng(900 + seed)
    n, m = int(rng.integers(2, 7)), int(rng.integers(1, 6))
    A = rng.integers(-3, 6, (m, n)).astype(float)
    x0 = rng.uniform(0, 2, n)
    b = A @ x0 + rng.uniform(0, 2, m)
    c = rng.integers(-5, 6, n).astype(float)
    lp = LinearProgram("min")
    for j in range(n):
        lp.add_var(ub=5.0, obj=c[j])
    rels = rng.choice([LE, GE], m)
    for i in range(m):
        rhs = b[i] if rels[i] == LE else A[i] @ x0 - rng.uniform(0, 2)
        lp.add_row({j: A[i, j] for j in range(n) if A[i, j]}, rels[i], float(rhs))
    res = solve_lp(lp)
    assert res.status == Status.OPTIMAL
    y = res.duals
    Am = lp.matrix()
    rhs = np.array([r.rhs for r in lp.rows])
    act = Am @ res.x
    for i, r in enumerate(lp.rows):
        # sign convention: y = d objective / d rhs (min problem)
        if r.rel == LE:
            assert y[i] <= 1e-7
        else:
            assert y[i] >= -1e-7
        assert abs(y[i] * (act[i] - rhs[i])) <= 1e-7
    # reduced costs c - A'y are absorbed by the variable bounds
    d = c - Am.T @ y
    ub = np.full(n, 5.0)
    bound_term = np.where(d > 0, 0.0, d * ub)
    for j in range(n):
        if d[j] > 1e-7:
            assert res.x[j] <= 1e-7
        elif d[j] < -1e-7:
            assert res.x[j] >= ub[j] - 1e-7
    assert abs(rhs @ y + bound_term.sum() - res.objective) <= 1e-7 * (1 + abs(res.objective))


def test_duals_are_rhs_sensitivities():
    rng = np.random.default_rng(42)
    n, m = 5, 4
    A = rng.uniform(0.5, 3, (m, n))
    b = A.sum(axis=1)
    c = rng.uniform(0.5, 2, n)
    base = solve_lp(build(c, A, b, sense="max", ub=[3.0] * n))
    h = 1e-6
    for i in range(m):
        b2 = b.copy()
        b2[i] += h
        bumped = solve_lp(build(c, A, b2, sense="max", ub=[3.0] * n))
        assert (bumped.objective - base.objective) / h == pytest.approx(base.duals[i], abs=1e-4)


def test_bit_for_bit_determinism():
    rng = np.random.default_rng(11)
    inst = random_bounded_lp(rng)
    r1, r2 = solve_lp(build(**inst)), solve_lp(build(**inst))
    assert r1.status == r2.status and r1.iterations == r2.iterations
    if r1.optimal:
        assert r1.x.tobytes() == r2.x.tobytes() and r1.duals.tobytes() == r2.duals.tobytes()
