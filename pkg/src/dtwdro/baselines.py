"""Comparison planners: nearest-PT placement, hottest-location placement and
the robust planner around a uniform reference."""
from __future__ import annotations

import math
import time
from dataclasses import replace
from typing import Sequence

import numpy as np

from .ambiguity import WassersteinBall
from .network import Scenario
from .planner import (Plan, PlannerConfig, PlanningInputs, _node_col, pointwise_selection, psi_matrix,
                      psi_tables, solve_plan)
from .requestlog import DiscreteDistribution, Request, SampleSpace, class_of

PLANNERS = ("WDRO", "Near-PT", "Near-RQ", "DRO-AVG")


def _nominal_psi(scenario: Scenario, space: SampleSpace) -> np.ndarray:
    # without a history, evaluate the class costs at each type's nominal response size
    const, scoef = psi_tables(scenario, space)
    S = np.array([scenario.pts[space.pt_type(k)].response_size for k in range(space.K)])
    return const + scoef * S[:, None]


def _expected_cost(psi: np.ndarray, selection: np.ndarray, p) -> float:
    V = psi.shape[1] - 1
    vec = np.array([psi[k, _node_col(int(g), V)] for k, g in enumerate(selection)])
    return float(np.asarray(p, dtype=float) @ vec)


def near_pt_plan(scenario: Scenario, space: SampleSpace, inputs: PlanningInputs | None = None) -> Plan:
    """Each server hosts the models of its own PTs, lowest PT index first, while they fit.

    With ``inputs`` the selection uses the historical class features and the
    objective is the expected cost under the reference; otherwise nominal
    response sizes are used and the objective is left as NaN.
    """
    t0 = time.perf_counter()
    M, V = scenario.M, scenario.V
    X = np.zeros((M, V), dtype=bool)
    used = np.zeros(V)
    for m, pt in enumerate(scenario.pts):
        v = pt.location
        if used[v] + pt.storage_cost <= scenario.servers[v].storage_capacity + 1e-9:
            X[m, v] = True
            used[v] += pt.storage_cost
    psi = psi_matrix(inputs) if inputs is not None else _nominal_psi(scenario, space)
    Y = pointwise_selection(scenario, space, X, psi)
    obj = _expected_cost(psi, Y, inputs.ball.reference) if inputs is not None else math.nan
    return Plan(X, Y, obj, "heuristic", solve_ms=1e3 * (time.perf_counter() - t0))


def near_rq_plan(scenario: Scenario, space: SampleSpace, history: Sequence[Request],
                 inputs: PlanningInputs | None = None) -> Plan:
    """Deploy each type where it is requested most; select on response latency alone."""
    if len(history) == 0:
        raise ValueError("Near-RQ needs a non-empty history")
    t0 = time.perf_counter()
    M, V = scenario.M, scenario.V
    counts = np.zeros((M, V), dtype=np.int64)
    for r in history:
        class_of(space, r)              # validates indices
        counts[r.pt_type, r.location] += 1
    by_type = counts.sum(axis=1)
    X = np.zeros((M, V), dtype=bool)
    used = np.zeros(V)
    for m in sorted(range(M), key=lambda m: (-by_type[m], m)):
        if by_type[m] == 0:
            continue
        cost = scenario.pts[m].storage_cost
        for v in sorted(range(V), key=lambda v: (-counts[m, v], v)):
            if counts[m, v] == 0:
                break
            if used[v] + cost <= scenario.servers[v].storage_capacity + 1e-9:
                X[m, v] = True
                used[v] += cost
                break
    if inputs is not None:
        _, scoef = psi_tables(scenario, space, inputs.request_count)
        resp_only = scoef * inputs.features.S[:, None]
        psi = psi_matrix(inputs)
    else:
        _, scoef = psi_tables(scenario, space)
        S = np.array([scenario.pts[space.pt_type(k)].response_size for k in range(space.K)])
        resp_only = scoef * S[:, None]
        psi = None
    Y = pointwise_selection(scenario, space, X, resp_only)
    obj = _expected_cost(psi, Y, inputs.ball.reference) if inputs is not None else math.nan
    return Plan(X, Y, obj, "heuristic", solve_ms=1e3 * (time.perf_counter() - t0))


def uniform_reference_inputs(inputs: PlanningInputs) -> PlanningInputs:
    """Same features, radius and ground cost, reference replaced by the uniform distribution."""
    K = inputs.space.K
    ball = WassersteinBall(np.asarray(DiscreteDistribution.uniform(K)), inputs.ball.tolerance, inputs.ball.cost)
    return replace(inputs, ball=ball)


def dro_avg_plan(inputs: PlanningInputs, config: PlannerConfig) -> Plan:
    """The robust planner with a uniform reference distribution."""
    return solve_plan(uniform_reference_inputs(inputs), config)
