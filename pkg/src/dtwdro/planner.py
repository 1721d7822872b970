"""Robust deployment/selection planning.

Three modes share one set of inputs:

``robust-support``
    the fully dualised MILP, where each class feature may move inside a box
    support set and the ground norm is l1 (so its dual norm is l-infinity);
``exact-dual``
    the MILP obtained by dualising the worst case over the discrete ball
    directly, with ground costs as constants;
``enumerate``
    depth-first enumeration of deployments, pointwise selection and an LP
    worst case for each; the reference answer for small instances.

Costs follow the minimisation orientation: serving class k from node g costs
``Psi[k, g] = -count * utility_gain``, and the cloud always costs 0.
"""
from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .ambiguity import WassersteinBall, tolerance_theta, worst_case_expectation
from .config import DEFAULT_TOLERANCES, SolverTolerances
from .lp import EQ, GE, LE, LinearProgram, MixedIntegerProgram, Status, solve_lp, solve_mip
from .network import CLOUD, Scenario, update_latency, update_latency_cloud
from .requestlog import (ClassFeatures, DiscreteDistribution, Request, SampleSpace, class_features,
                         empirical_distribution, ground_cost_matrix)

MODES = ("robust-support", "exact-dual", "enumerate")


class UnsupportedConfiguration(ValueError):
    pass


@dataclass(frozen=True)
class PlannerConfig:
    beta: float = 0.95
    ground_norm: str = "l1"
    mode: str = "robust-support"
    expected_request_count: float | None = None   # None: size of the history
    support_margin: float = 0.10
    theta_override: float | None = None
    tolerances: SolverTolerances = DEFAULT_TOLERANCES

    def __post_init__(self):
        if not 0.0 <= self.beta < 1.0:
            raise ValueError("beta must lie in [0, 1)")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.ground_norm not in ("l1", "l2"):
            raise ValueError("ground_norm must be 'l1' or 'l2'")
        if self.support_margin < 0:
            raise ValueError("support_margin must be non-negative")
        if self.expected_request_count is not None and not self.expected_request_count > 0:
            raise ValueError("expected_request_count must be positive")
        if self.theta_override is not None and not self.theta_override >= 0:
            raise ValueError("theta_override must be non-negative")


@dataclass(frozen=True, eq=False)
class SupportPolytope:
    """Box {xi : lo <= xi <= hi}, i.e. C xi <= d with C = [I; -I], d = [hi; -lo]."""
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=float)
        hi = np.asarray(self.hi, dtype=float)
        if lo.shape != hi.shape or np.any(lo > hi):
            raise ValueError("support box needs lo <= hi componentwise")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def C(self) -> np.ndarray:
        n = self.lo.size
        return np.vstack([np.eye(n), -np.eye(n)])

    @property
    def d(self) -> np.ndarray:
        return np.concatenate([self.hi, -self.lo])

    def contains(self, xi, tol: float = 1e-12) -> bool:
        xi = np.atleast_2d(xi)
        return bool(np.all(xi >= self.lo - tol) and np.all(xi <= self.hi + tol))

    @classmethod
    def around(cls, xi: np.ndarray, margin: float) -> "SupportPolytope":
        lo = xi.min(axis=0)
        hi = xi.max(axis=0)
        span = hi - lo
        pad = margin * np.where(span > 0, span, np.abs(hi))
        return cls(np.maximum(lo - pad, np.minimum(lo, 0.0)), hi + pad)


@dataclass(eq=False)
class PlanningInputs:
    scenario: Scenario
    space: SampleSpace
    features: ClassFeatures
    ball: WassersteinBall
    support: SupportPolytope
    request_count: float
    beta: float


def prepare_inputs(scenario: Scenario, history: Sequence[Request], config: PlannerConfig,
                   reference: DiscreteDistribution | np.ndarray | None = None) -> PlanningInputs:
    """Sample space, class features, ball and support box from a request history."""
    space = SampleSpace.of(scenario)
    feats = class_features(scenario, space, history)
    p0 = np.asarray(empirical_distribution(space, history) if reference is None else reference, dtype=float)
    theta = (config.theta_override if config.theta_override is not None
             else tolerance_theta(space.K, len(history), config.beta))
    ball = WassersteinBall(p0, theta, ground_cost_matrix(feats, config.ground_norm))
    support = SupportPolytope.around(feats.xi, config.support_margin)
    count = float(config.expected_request_count or len(history))
    return PlanningInputs(scenario, space, feats, ball, support, count, config.beta)


@dataclass
class Plan:
    deployment: np.ndarray       # (M, V) bool
    selection: np.ndarray        # (K,) serving node per class, CLOUD = -1
    objective: float
    mode: str
    theta: float = math.nan
    beta: float = math.nan
    status: str = "optimal"
    solve_ms: float = 0.0
    stats: dict = field(default_factory=dict)

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"

    def to_dict(self) -> dict:
        dep = [[int(m) + 1, int(v) + 1] for m, v in zip(*np.nonzero(self.deployment))]
        sel = [[k, int(g) + 1 if g != CLOUD else CLOUD] for k, g in enumerate(self.selection)]
        return {
            "deployment": dep,
            "selection": sel,
            "objective": float(self.objective),
            "mode": self.mode,
            "theta": float(self.theta),
            "beta": float(self.beta),
            "shape": list(self.deployment.shape),
            "status": self.status,
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_dict(cls, data: dict, scenario: Scenario | None = None) -> "Plan":
        if scenario is not None:
            M, V = scenario.M, scenario.V
        else:
            M, V = data["shape"]
        X = np.zeros((M, V), dtype=bool)
        for m, v in data["deployment"]:
            X[m - 1, v - 1] = True
        Y = np.full(M * V, CLOUD, dtype=np.int64)
        for k, g in data["selection"]:
            Y[k] = CLOUD if g == CLOUD else g - 1
        return cls(X, Y, float(data["objective"]), data["mode"], float(data.get("theta", math.nan)),
                   float(data.get("beta", math.nan)), data.get("status", "optimal"))

    @classmethod
    def from_json(cls, text: str, scenario: Scenario | None = None) -> "Plan":
        return cls.from_dict(json.loads(text), scenario)


# -- class costs ---------------------------------------------------------------


def psi_coefficients(scenario: Scenario, space: SampleSpace, k: int, g: int,
                     count: float = 1.0) -> tuple[float, np.ndarray]:
    """Cost of serving class ``k`` from ``g`` as ``const + coef . (T, S)``."""
    loc, m = space.cell(k)
    if g == CLOUD:
        return 0.0, np.zeros(2)
    const = update_latency(scenario, m, g) - update_latency_cloud(scenario, m)
    unit_edge = 0.0 if g == loc else scenario.inter_es_unit_latency[g, loc]
    s_coef = unit_edge - scenario.cloud_unit_latency[loc]
    return count * const, np.array([0.0, count * s_coef])


def psi_tables(scenario: Scenario, space: SampleSpace, count: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """(K, V+1) constant parts and S-coefficients; column V is the cloud (all zero)."""
    K, V = space.K, space.V
    const = np.zeros((K, V + 1))
    scoef = np.zeros((K, V + 1))
    for k in range(K):
        for g in range(V):
            c, xi = psi_coefficients(scenario, space, k, g, count)
            const[k, g], scoef[k, g] = c, xi[1]
    return const, scoef


def psi_matrix(inputs: PlanningInputs) -> np.ndarray:
    """(K, V+1) class costs evaluated at the empirical class features."""
    const, scoef = psi_tables(inputs.scenario, inputs.space, inputs.request_count)
    return const + scoef * inputs.features.S[:, None]


def _node_col(g: int, V: int) -> int:
    return V if g == CLOUD else g


def plan_costs(inputs: PlanningInputs, selection: np.ndarray) -> np.ndarray:
    """Per-class cost vector of a selection."""
    psi = psi_matrix(inputs)
    V = inputs.space.V
    return np.array([psi[k, _node_col(int(g), V)] for k, g in enumerate(selection)])


def pointwise_selection(scenario: Scenario, space: SampleSpace, X: np.ndarray,
                        psi: np.ndarray) -> np.ndarray:
    """Cheapest available node per class; ties go to the lowest server, the cloud last."""
    V = space.V
    Y = np.full(space.K, CLOUD, dtype=np.int64)
    for k in range(space.K):
        m = space.pt_type(k)
        best, choice = math.inf, CLOUD
        for g in range(V):
            if X[m, g] and psi[k, g] < best:
                best, choice = psi[k, g], g
        if psi[k, V] < best:
            choice = CLOUD
        Y[k] = choice
    return Y


def storage_feasible(scenario: Scenario, X: np.ndarray, tol: float = 1e-9) -> bool:
    used = scenario.storage_costs @ X.astype(float)
    return bool(np.all(used <= scenario.capacities + tol))


def check_plan(scenario: Scenario, space: SampleSpace, plan: Plan) -> None:
    """Raise ``ValueError`` when ``plan`` breaks storage or linking."""
    if not storage_feasible(scenario, plan.deployment):
        raise ValueError("deployment exceeds a storage capacity")
    if plan.selection.shape != (space.K,):
        raise ValueError("selection must assign every class")
    for k, g in enumerate(plan.selection):
        if g != CLOUD and not plan.deployment[space.pt_type(k), g]:
            raise ValueError(f"class {k} served from server {g} without a deployed model")


def robust_value(inputs: PlanningInputs, selection: np.ndarray) -> float:
    """Worst-case expected cost of a fixed selection over the inputs' ball."""
    return worst_case_expectation(plan_costs(inputs, selection), inputs.ball).value


# -- MILP builders -------------------------------------------------------------


@dataclass
class _Layout:
    x: np.ndarray          # (M, V) variable indices
    y: np.ndarray          # (K, V+1) variable indices; last column is the cloud
    lam: int
    h: np.ndarray


def _placement_block(mip: MixedIntegerProgram, scenario: Scenario, space: SampleSpace,
                     binary_selection: bool = True) -> tuple[np.ndarray, np.ndarray]:
    lp = mip.lp
    M, V, K = scenario.M, scenario.V, space.K
    x = np.array([[mip.add_binary(f"x_{m}_{v}") for v in range(V)] for m in range(M)], dtype=np.int64)
    if binary_selection:
        add_y = mip.add_binary
    else:
        def add_y(name):
            return lp.add_var(name, 0.0, 1.0)
    y = np.array([[add_y(f"y_{k}_{'c' if g == V else g}") for g in range(V + 1)] for k in range(K)],
                 dtype=np.int64)
    costs = scenario.storage_costs
    for v in range(V):
        lp.add_row({int(x[m, v]): costs[m] for m in range(M)}, LE, scenario.servers[v].storage_capacity,
                   f"storage_{v}")
    for k in range(K):
        lp.add_row({int(y[k, g]): 1.0 for g in range(V + 1)}, EQ, 1.0, f"select_{k}")
    for k in range(K):
        m = space.pt_type(k)
        for v in range(V):
            lp.add_row({int(y[k, v]): 1.0, int(x[m, v]): -1.0}, LE, 0.0, f"link_{k}_{v}")
    return x, y


def build_p3(inputs: PlanningInputs, config: PlannerConfig) -> tuple[MixedIntegerProgram, _Layout]:
    """Fully dualised robust counterpart with the box support for class features."""
    if config.ground_norm != "l1":
        raise UnsupportedConfiguration("robust-support mode needs the l1 ground norm")
    scenario, space, ball, box = inputs.scenario, inputs.space, inputs.ball, inputs.support
    K, V = space.K, space.V
    const, scoef = psi_tables(scenario, space, inputs.request_count)
    xi = inputs.features.xi
    d = box.d                      # (hi_T, hi_S, -lo_T, -lo_S)
    mip = MixedIntegerProgram(LinearProgram("min", "robust_support"))
    lp = mip.lp
    x, y = _placement_block(mip, scenario, space)
    lam = lp.add_var("lam", 0.0, math.inf, ball.tolerance)
    h = np.array([lp.add_var(f"h_{j}", -math.inf, math.inf, ball.reference[j]) for j in range(K)])
    n = np.array([[lp.add_var(f"n_{j}_{i}", -math.inf, math.inf) for i in range(2)] for j in range(K)])
    for j in range(K):
        for i in range(2):
            lp.add_row({int(n[j, i]): 1.0, lam: -1.0}, LE, 0.0, f"dnorm_hi_{j}_{i}")
            lp.add_row({int(n[j, i]): -1.0, lam: -1.0}, LE, 0.0, f"dnorm_lo_{j}_{i}")
    for j in range(K):
        for k in range(K):
            z = [lp.add_var(f"z_{j}_{k}_{q}") for q in range(4)]
            row = {int(y[k, g]): const[k, g] for g in range(V) if const[k, g] != 0.0}
            for i in range(2):
                if xi[j, i] != 0.0:
                    row[int(n[j, i])] = xi[j, i]
            for q in range(4):
                if d[q] != 0.0:
                    row[z[q]] = d[q]
            row[int(h[j])] = -1.0
            lp.add_row(row, LE, 0.0, f"robust_{j}_{k}")
            # C^T z = psi1_k(y) - n_j ; the T coefficient of psi is zero
            lp.add_row({z[0]: 1.0, z[2]: -1.0, int(n[j, 0]): 1.0}, EQ, 0.0, f"dual_T_{j}_{k}")
            srow = {z[1]: 1.0, z[3]: -1.0, int(n[j, 1]): 1.0}
            for g in range(V):
                if scoef[k, g] != 0.0:
                    srow[int(y[k, g])] = -scoef[k, g]
            lp.add_row(srow, EQ, 0.0, f"dual_S_{j}_{k}")
    return mip, _Layout(x, y, lam, h)


def build_exact_dual(inputs: PlanningInputs, config: PlannerConfig) -> tuple[MixedIntegerProgram, _Layout]:
    """Dual of the discrete worst case, embedded row by row (one row per (j, k))."""
    scenario, space, ball = inputs.scenario, inputs.space, inputs.ball
    K, V = space.K, space.V
    psi = psi_matrix(inputs)
    mip = MixedIntegerProgram(LinearProgram("min", "exact_dual"))
    lp = mip.lp
    # y may stay continuous: for a fixed deployment every cut row is tightest when each
    # class puts all its weight on its cheapest open node, so some optimum is integral
    x, y = _placement_block(mip, scenario, space, binary_selection=False)
    lam = lp.add_var("lam", 0.0, math.inf, ball.tolerance)
    h = np.array([lp.add_var(f"h_{j}", -math.inf, math.inf, ball.reference[j]) for j in range(K)])
    for j in range(K):
        for k in range(K):
            row = {int(h[j]): 1.0}
            if ball.cost[k, j] != 0.0:
                row[lam] = ball.cost[k, j]
            for g in range(V):
                if psi[k, g] != 0.0:
                    row[int(y[k, g])] = -psi[k, g]
            lp.add_row(row, GE, 0.0, f"cut_{j}_{k}")
    return mip, _Layout(x, y, lam, h)


def build_model(inputs: PlanningInputs, config: PlannerConfig) -> MixedIntegerProgram:
    if config.mode == "robust-support":
        return build_p3(inputs, config)[0]
    if config.mode == "exact-dual":
        return build_exact_dual(inputs, config)[0]
    raise UnsupportedConfiguration("enumerate mode builds no model")


# -- solving -------------------------------------------------------------------


def _enumerate(inputs: PlanningInputs) -> tuple[np.ndarray, np.ndarray, float, int]:
    scenario, space = inputs.scenario, inputs.space
    M, V = scenario.M, scenario.V
    psi = psi_matrix(inputs)
    costs = scenario.storage_costs
    caps = scenario.capacities
    cells = [(m, v) for m in range(M) for v in range(V)]
    X = np.zeros((M, V), dtype=bool)
    used = np.zeros(V)
    cache: dict[bytes, float] = {}
    best = [math.inf, None, None]
    evaluated = [0]

    def leaf():
        # only maximal deployments matter: adding a model never raises any class cost
        for m, v in cells:
            if not X[m, v] and used[v] + costs[m] <= caps[v] + 1e-9:
                return
        Y = pointwise_selection(scenario, space, X, psi)
        key = Y.tobytes()
        if key not in cache:
            vec = np.array([psi[k, _node_col(int(g), V)] for k, g in enumerate(Y)])
            cache[key] = worst_case_expectation(vec, inputs.ball).value
            evaluated[0] += 1
        val = cache[key]
        if not math.isfinite(best[0]) or val < best[0] - 1e-9 * (1.0 + abs(best[0])):
            best[0], best[1], best[2] = val, X.copy(), Y

    def dfs(i):
        if i == len(cells):
            leaf()
            return
        m, v = cells[i]
        if used[v] + costs[m] <= caps[v] + 1e-9:
            X[m, v] = True
            used[v] += costs[m]
            dfs(i + 1)
            X[m, v] = False
            used[v] -= costs[m]
        dfs(i + 1)

    dfs(0)
    return best[1], best[2], best[0], evaluated[0]


def greedy_deployment(inputs: PlanningInputs, preference: np.ndarray | None = None) -> np.ndarray:
    """Maximal deployment built by adding (PT, server) pairs while they fit.

    Pairs are taken in descending ``preference`` (e.g. an LP relaxation's
    x values), then by expected saving under the reference distribution.
    """
    scenario, space = inputs.scenario, inputs.space
    M, V = scenario.M, scenario.V
    psi = psi_matrix(inputs)
    p0 = inputs.ball.reference
    saving = np.zeros((M, V))
    for k in range(space.K):
        m = space.pt_type(k)
        saving[m] += p0[k] * np.maximum(-psi[k, :V], 0.0)
    pref = np.zeros((M, V)) if preference is None else np.round(preference, 6)
    order = sorted(((m, v) for m in range(M) for v in range(V)), key=lambda mv: (-pref[mv], -saving[mv], mv))
    X = np.zeros((M, V), dtype=bool)
    used = np.zeros(V)
    costs, caps = scenario.storage_costs, scenario.capacities
    for m, v in order:
        if used[v] + costs[m] <= caps[v] + 1e-9:
            X[m, v] = True
            used[v] += costs[m]
    return X


def robust_greedy_deployment(inputs: PlanningInputs) -> np.ndarray:
    """Maximal deployment grown one pair at a time by worst-case value.

    Each step adds the fitting pair whose pointwise plan has the lowest
    ``robust_value``.  While some class is still served by the cloud the
    adversary can usually pile mass on it and the value sits at zero, so ties
    go to the pair leaving fewer cloud classes, then to the larger expected
    saving.
    """
    scenario, space = inputs.scenario, inputs.space
    M, V = scenario.M, scenario.V
    psi = psi_matrix(inputs)
    saving = np.zeros((M, V))
    for k in range(space.K):
        saving[space.pt_type(k)] += inputs.ball.reference[k] * np.maximum(-psi[k, :V], 0.0)
    costs, caps = scenario.storage_costs, scenario.capacities
    X = np.zeros((M, V), dtype=bool)
    used = np.zeros(V)
    while True:
        best = None
        for m, v in np.ndindex(X.shape):
            if X[m, v] or used[v] + costs[m] > caps[v] + 1e-9:
                continue
            X[m, v] = True
            Y = pointwise_selection(scenario, space, X, psi)
            X[m, v] = False
            key = (round(robust_value(inputs, Y), 9), int(np.sum(Y == CLOUD)), -saving[m, v])
            if best is None or key < best[0]:
                best = (key, m, v)
        if best is None:
            return X
        _, m, v = best
        X[m, v] = True
        used[v] += costs[m]


def _assignment(inputs: PlanningInputs, lay: _Layout, X: np.ndarray) -> dict[int, float]:
    Y = pointwise_selection(inputs.scenario, inputs.space, X, psi_matrix(inputs))
    V = inputs.space.V
    values = {int(j): float(X[m, v]) for (m, v), j in np.ndenumerate(lay.x)}
    for k, g in enumerate(Y):
        for col in range(V + 1):
            values[int(lay.y[k, col])] = float(col == _node_col(int(g), V))
    return values


def _start_deployment(inputs: PlanningInputs) -> np.ndarray:
    psi = psi_matrix(inputs)
    X = greedy_deployment(inputs)
    Y = pointwise_selection(inputs.scenario, inputs.space, X, psi)
    if not np.any(Y == CLOUD):
        return X
    # some class is left to the cloud: the slower robust greedy usually does much better
    R = robust_greedy_deployment(inputs)
    if robust_value(inputs, pointwise_selection(inputs.scenario, inputs.space, R, psi)) < robust_value(inputs, Y):
        return R
    return X


def _prune_unused(space: SampleSpace, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    keep = np.zeros_like(X)
    for k, g in enumerate(Y):
        if g != CLOUD:
            keep[space.pt_type(k), g] = True
    return X & keep


def solve_plan(inputs: PlanningInputs, config: PlannerConfig) -> Plan:
    """Solve in ``config.mode`` and return the robust plan."""
    t0 = time.perf_counter()
    theta, beta = inputs.ball.tolerance, inputs.beta
    if config.mode == "enumerate":
        X, Y, val, evaluated = _enumerate(inputs)
        return Plan(_prune_unused(inputs.space, X, Y), Y, val, config.mode, theta, beta, "optimal",
                    1e3 * (time.perf_counter() - t0), {"evaluated": evaluated})
    if config.mode == "robust-support":
        mip, lay = build_p3(inputs, config)
    else:
        mip, lay = build_exact_dual(inputs, config)
    if config.mode == "robust-support":
        # the exact-dual model is far smaller and its optimum is a strong incumbent here
        X0 = solve_plan(inputs, replace(config, mode="exact-dual")).deployment
        X0 = greedy_deployment(inputs, X0.astype(float))      # back to a maximal deployment
    else:
        X0 = _start_deployment(inputs)
    res = solve_mip(mip, config.tolerances, start=_assignment(inputs, lay, X0),
                    heuristic=lambda x: _assignment(inputs, lay, greedy_deployment(inputs, x[lay.x])))
    elapsed = 1e3 * (time.perf_counter() - t0)
    stats = {"nodes": res.nodes, "iterations": res.iterations, "rows": mip.lp.n_rows, "vars": mip.lp.n_vars}
    if res.x is None:
        raise RuntimeError(f"planning MILP ended {res.status.value} without a plan")
    X = np.round(res.x[lay.x]).astype(bool)
    ysol = np.round(res.x[lay.y])
    V = inputs.space.V
    Y = np.array([CLOUD if int(np.argmax(row)) == V else int(np.argmax(row)) for row in ysol], dtype=np.int64)
    # the objective only sees the binding classes; the others are canonicalised
    # to their cheapest available node when that provably costs nothing
    Y_pw = pointwise_selection(inputs.scenario, inputs.space, X, psi_matrix(inputs))
    if config.mode == "exact-dual":
        Y = Y_pw
    elif not np.array_equal(Y, Y_pw):
        lo = np.array(mip.lp.lb, dtype=float)
        hi = np.array(mip.lp.ub, dtype=float)
        for j, v in _assignment(inputs, lay, X).items():
            lo[j] = hi[j] = v
        check = solve_lp(mip.lp, config.tolerances, lo, hi)
        if check.optimal and check.objective <= res.objective + 1e-9 * (1.0 + abs(res.objective)):
            Y = Y_pw
    X = _prune_unused(inputs.space, X, Y)
    status = "optimal" if res.status == Status.OPTIMAL else res.status.value
    return Plan(X, Y, res.objective, config.mode, theta, beta, status, elapsed, stats)


def plan_from_history(scenario: Scenario, history: Sequence[Request], config: PlannerConfig,
                      reference=None) -> Plan:
    return solve_plan(prepare_inputs(scenario, history, config, reference), config)
