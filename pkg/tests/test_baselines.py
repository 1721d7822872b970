import numpy as np
import pytest

from dtwdro.baselines import dro_avg_plan, near_pt_plan, near_rq_plan, uniform_reference_inputs
from dtwdro.network import CLOUD, EdgeServer, PhysicalTwin, Scenario
from dtwdro.planner import (PlannerConfig, check_plan, plan_costs, pointwise_selection, prepare_inputs, psi_matrix,
                            robust_value, solve_plan)
from dtwdro.requestlog import Request, SampleSpace

from conftest import small_instance


def two_server(caps=(10.0, 10.0), pts=None):
    pts = pts or [PhysicalTwin(0, 0, 2.0, 100.0, 1.0, 1.0)]
    return Scenario([EdgeServer(0, caps[0]), EdgeServer(1, caps[1])], [5.0, 5.0], [[0.0, 1.0], [1.0, 0.0]],
                    0.5, pts)


# -- Near-PT ------------------------------------------------------------------

@pytest.mark.parametrize("seed", range(5))
def test_near_pt_unconstrained_is_the_local_diagonal(seed):
    sc, sp, _ = small_instance(seed, V=3, M=4, storage_gb=(1e3, 1e3))
    plan = near_pt_plan(sc, sp)
    expected = np.zeros((sc.M, sc.V), dtype=bool)
    for m, pt in enumerate(sc.pts):
        expected[m, pt.location] = True
    assert np.array_equal(plan.deployment, expected)
    check_plan(sc, sp, plan)


def test_near_pt_tiny_storage_is_all_cloud():
    sc = two_server(caps=(0.1, 0.1))
    plan = near_pt_plan(sc, SampleSpace.of(sc))
    assert not plan.deployment.any()
    assert np.all(plan.selection == CLOUD)


def test_near_pt_lower_index_wins():
    pts = [PhysicalTwin(0, 1, 2.0, 100.0, 1.5, 1.0), PhysicalTwin(1, 1, 2.0, 100.0, 1.5, 1.0)]
    sc = two_server(caps=(10.0, 2.0), pts=pts)
    plan = near_pt_plan(sc, SampleSpace.of(sc))
    assert plan.deployment.tolist() == [[False, True], [False, False]]


# -- Near-RQ ------------------------------------------------------------------

def test_near_rq_hottest_location():
    sc = two_server()
    hist = [Request(0.0, 1, 0, 1.0)] * 4
    plan = near_rq_plan(sc, SampleSpace.of(sc), hist)
    assert plan.deployment.tolist() == [[False, True]]


def test_near_rq_skips_unrequested_types():
    pts = [PhysicalTwin(0, 0, 2.0, 100.0, 1.0, 1.0), PhysicalTwin(1, 0, 2.0, 100.0, 1.0, 1.0)]
    sc = two_server(pts=pts)
    plan = near_rq_plan(sc, SampleSpace.of(sc), [Request(0.0, 0, 0, 1.0)])
    assert plan.deployment[1].tolist() == [False, False]
    assert plan.deployment[0].tolist() == [True, False]


def test_near_rq_falls_back_to_second_hottest():
    # type 1 (index 0) is most popular and fills server 0; type 2 is hottest at server 0 too (10 vs 7)
    pts = [PhysicalTwin(0, 0, 2.0, 100.0, 2.0, 1.0), PhysicalTwin(1, 0, 2.0, 100.0, 2.0, 1.0)]
    sc = two_server(caps=(2.5, 2.5), pts=pts)
    hist = ([Request(0.0, 0, 0, 1.0)] * 30 + [Request(0.0, 0, 1, 1.0)] * 10 + [Request(0.0, 1, 1, 1.0)] * 7)
    plan = near_rq_plan(sc, SampleSpace.of(sc), hist)
    assert plan.deployment.tolist() == [[True, False], [False, True]]


def test_near_rq_selection_ignores_update_latency():
    # the PT sits next to a fast cloud link: updating through server 1 costs 20*(0.5+0.2) = 14 ms
    # against 20*0.3 = 6 ms via the cloud, which outweighs the 5 ms response saving at location 1
    pts = [PhysicalTwin(0, 0, 20.0, 100.0, 1.0, 1.0)]
    sc = Scenario([EdgeServer(0, 10.0), EdgeServer(1, 10.0)], [0.3, 5.0], [[0.0, 0.2], [0.2, 0.0]], 0.5, pts)
    sp = SampleSpace.of(sc)
    hist = [Request(0.0, 1, 0, 1.0)] * 3 + [Request(0.0, 0, 0, 1.0)] * 2
    cfg = PlannerConfig(mode="exact-dual")
    inputs = prepare_inputs(sc, hist, cfg)
    plan = near_rq_plan(sc, sp, hist, inputs)
    assert plan.deployment.tolist() == [[False, True]]
    assert plan.selection.tolist() == [1, 1]
    assert pointwise_selection(sc, sp, plan.deployment, psi_matrix(inputs)).tolist() == [CLOUD, CLOUD]


def test_near_rq_needs_history():
    sc = two_server()
    with pytest.raises(ValueError):
        near_rq_plan(sc, SampleSpace.of(sc), [])


# -- DRO-AVG ------------------------------------------------------------------

def test_dro_avg_on_uniform_history_equals_wdro():
    sc = two_server()
    hist = [Request(0.0, 0, 0, 1.0, response_time=5.0), Request(0.0, 1, 0, 1.0, response_time=9.0)] * 3
    cfg = PlannerConfig(mode="exact-dual")
    inputs = prepare_inputs(sc, hist, cfg)
    a, b = solve_plan(inputs, cfg), dro_avg_plan(inputs, cfg)
    assert np.array_equal(a.deployment, b.deployment) and np.array_equal(a.selection, b.selection)
    assert a.objective == pytest.approx(b.objective, abs=1e-12)


def test_dro_avg_theta_zero_is_uniform_saa():
    sc, sp, hist = small_instance(4)
    cfg = PlannerConfig(mode="exact-dual", theta_override=0.0)
    inputs = prepare_inputs(sc, hist, cfg)
    plan = dro_avg_plan(inputs, cfg)
    uni = uniform_reference_inputs(inputs)
    assert np.allclose(uni.ball.reference, 1.0 / sp.K)
    enum = solve_plan(uni, PlannerConfig(mode="enumerate", theta_override=0.0))
    assert plan.objective == pytest.approx(enum.objective, abs=1e-9 * (1 + abs(enum.objective)))


def test_dro_avg_skewed_history():
    sc = two_server(caps=(1.0, 1.0))
    hist = ([Request(0.0, 0, 0, 1.0, response_time=5.0)] * 9 + [Request(0.0, 1, 0, 1.0, response_time=9.0)])
    cfg = PlannerConfig(mode="exact-dual", theta_override=0.2)
    inputs = prepare_inputs(sc, hist, cfg)
    wdro, avg = solve_plan(inputs, cfg), dro_avg_plan(inputs, cfg)
    assert robust_value(inputs, wdro.selection) <= robust_value(inputs, avg.selection) + 1e-9


# -- invariants ---------------------------------------------------------------

@pytest.mark.parametrize("seed", range(8))
def test_wdro_is_no_worse_than_baselines_on_its_own_ball(seed):
    sc, sp, hist = small_instance(seed, V=3, M=3, storage_gb=(1.0, 4.0))
    cfg = PlannerConfig(mode="exact-dual")
    inputs = prepare_inputs(sc, hist, cfg)
    wdro = solve_plan(inputs, cfg)
    best = robust_value(inputs, wdro.selection)
    assert best == pytest.approx(wdro.objective, abs=1e-6 * (1 + abs(best)))
    for plan in (near_pt_plan(sc, sp, inputs), near_rq_plan(sc, sp, hist, inputs), dro_avg_plan(inputs, cfg)):
        check_plan(sc, sp, plan)
        assert best <= robust_value(inputs, plan.selection) + 1e-6 * (1 + abs(best))


def test_heuristic_objective_is_reference_expectation():
    sc, sp, hist = small_instance(2)
    inputs = prepare_inputs(sc, hist, PlannerConfig())
    plan = near_pt_plan(sc, sp, inputs)
    assert plan.objective == pytest.approx(float(inputs.ball.reference @ plan_costs(inputs, plan.selection)))
    assert np.isnan(near_pt_plan(sc, sp).objective)
