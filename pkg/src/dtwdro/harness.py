"""Scenario and request generators, plan evaluation and experiment sweeps."""
from __future__ import annotations

import csv
import io
import logging
import math
import time
from dataclasses import asdict, dataclass, field, replace
from typing import Sequence

import numpy as np

from .baselines import dro_avg_plan, near_pt_plan, near_rq_plan
from .network import CLOUD, EdgeServer, PhysicalTwin, Scenario, gain_components, response_aoi
from .planner import Plan, PlannerConfig, prepare_inputs, solve_plan
from .requestlog import DiscreteDistribution, Request, SampleSpace, class_of

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GeneratorParams:
    seed: int = 0
    V: int = 4
    M: int = 4
    storage_gb: tuple[float, float] = (8.0, 16.0)
    model_gb: tuple[float, float] = (0.5, 2.0)
    update_mb: tuple[float, float] = (2.0, 5.0)
    response_mb: tuple[float, float] = (0.5, 2.0)
    inter_es_latency: tuple[float, float] = (0.2, 1.0)     # ms/MB
    cloud_latency: tuple[float, float] = (2.0, 10.0)       # ms/MB
    upload_latency: tuple[float, float] = (0.2, 1.0)       # ms/MB
    update_period_ms: tuple[float, float] = (50.0, 500.0)
    history_size: int = 500
    future_size: int = 500
    shift: float = 0.5
    horizon_ms: float = 60_000.0

    def __post_init__(self):
        for name in ("storage_gb", "model_gb", "update_mb", "response_mb", "inter_es_latency",
                     "cloud_latency", "upload_latency", "update_period_ms"):
            lo, hi = getattr(self, name)
            if not lo <= hi:
                raise ValueError(f"{name}: empty range ({lo}, {hi})")
        if not 0.0 <= self.shift <= 1.0:
            raise ValueError("shift must lie in [0, 1]")
        if self.V < 1 or self.M < 1:
            raise ValueError("need at least one server and one PT")


def _rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(stream)]))


def generate_scenario(params: GeneratorParams) -> Scenario:
    """Uniform draws from the parameter ranges; deterministic per seed."""
    rng = _rng(params.seed, 0)
    V, M = params.V, params.M
    caps = rng.uniform(*params.storage_gb, size=V)
    cloud = rng.uniform(*params.cloud_latency, size=V)
    upper = rng.uniform(*params.inter_es_latency, size=(V, V))
    inter = np.triu(upper, 1)
    inter = inter + inter.T
    upload = float(rng.uniform(*params.upload_latency))
    locs = rng.integers(0, V, size=M)
    upd = rng.uniform(*params.update_mb, size=M)
    period = rng.uniform(*params.update_period_ms, size=M)
    size = rng.uniform(*params.model_gb, size=M)
    resp = rng.uniform(*params.response_mb, size=M)
    return Scenario(
        servers=[EdgeServer(v, float(caps[v])) for v in range(V)],
        cloud_unit_latency=cloud,
        inter_es_unit_latency=inter,
        upload_unit_latency=upload,
        pts=[PhysicalTwin(m, int(locs[m]), float(upd[m]), float(period[m]), float(size[m]), float(resp[m]))
             for m in range(M)],
    )


def historical_distribution(space: SampleSpace, seed: int) -> DiscreteDistribution:
    """Seeded class popularity: locations and types each get a random weight."""
    rng = _rng(seed, 1)
    loc_w = rng.dirichlet(np.ones(space.V))
    type_w = rng.dirichlet(np.ones(space.M), size=space.V)
    p = (loc_w[:, None] * type_w).ravel()
    return DiscreteDistribution(p / p.sum())


def shift_distribution(p0, s: float, seed: int) -> DiscreteDistribution:
    """Mix ``p0`` with a uniformly random point of the simplex: (1 - s) p0 + s q."""
    if not 0.0 <= s <= 1.0:
        raise ValueError("shift must lie in [0, 1]")
    p0 = np.asarray(p0, dtype=float)
    q = _rng(seed, 2).dirichlet(np.ones(p0.size))
    p = (1.0 - s) * p0 + s * q
    return DiscreteDistribution(p / p.sum())


def generate_requests(scenario: Scenario, space: SampleSpace, distribution, count: int, seed: int,
                      horizon_ms: float = 60_000.0, stream: int = 3) -> list[Request]:
    """``count`` i.i.d. requests; response sizes are the per-type nominal sizes.

    ``stream`` separates independent logs drawn with the same seed (history
    and future requests use different streams).
    """
    if count == 0:
        return []
    rng = _rng(seed, stream)
    p = np.asarray(distribution, dtype=float)
    classes = rng.choice(space.K, size=count, p=p)
    times = np.sort(rng.uniform(0.0, horizon_ms, size=count))
    out = []
    for t, k in zip(times, classes):
        loc, m = space.cell(int(k))
        out.append(Request(float(t), loc, m, scenario.pts[m].response_size))
    return out


# -- evaluation ----------------------------------------------------------------


@dataclass
class EvaluationReport:
    total_utility_gain: float       # ms, summed over requests
    update_gain: float
    response_gain: float
    per_class: np.ndarray           # (K,) gain per class
    requests: int
    planner: str = ""
    seed: int | None = None
    parameters: dict = field(default_factory=dict)

    def rows(self) -> list[tuple]:
        """(class, location, pt_type, gain) rows; ids 1-based like the request logs."""
        K = self.per_class.size
        M = self.parameters.get("M") or 1
        return [(k, k // M + 1, k % M + 1, float(self.per_class[k])) for k in range(K)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["class", "location", "pt_type", "gain_ms"])
        for row in self.rows():
            w.writerow([row[0], row[1], row[2], repr(row[3])])
        w.writerow(["total", "", "", repr(self.total_utility_gain)])
        w.writerow(["update", "", "", repr(self.update_gain)])
        w.writerow(["response", "", "", repr(self.response_gain)])
        return buf.getvalue()


def evaluate_plan(scenario: Scenario, space: SampleSpace, plan: Plan, requests: Sequence[Request],
                  planner: str = "", seed: int | None = None, parameters: dict | None = None,
                  check_aoi: bool = True) -> EvaluationReport:
    """Total utility gain of ``plan`` over ``requests``.

    Each request is scored with the closed-form gain; with ``check_aoi`` it is
    also scored as the difference of response AoIs at its issue time, and the
    two must agree to 1e-9 (relative to the AoI magnitude).
    """
    per_class = np.zeros(space.K)
    upd_total = resp_total = 0.0
    for r in requests:
        try:
            k = class_of(space, r)
        except IndexError as exc:
            raise ValueError(f"request {r} does not map to a class: {exc}") from None
        g = int(plan.selection[k])
        upd, resp = gain_components(scenario, r.pt_type, g, r.location, r.response_size)
        if check_aoi:
            cloud = response_aoi(scenario, r.pt_type, CLOUD, r.location, r.response_size, r.time)
            edge = response_aoi(scenario, r.pt_type, g, r.location, r.response_size, r.time)
            if abs((cloud - edge) - (upd + resp)) > 1e-9 * (1.0 + abs(cloud)):
                raise RuntimeError(f"AoI difference and closed-form gain disagree for {r}")
        per_class[k] += upd + resp
        upd_total += float(upd)
        resp_total += float(resp)
    return EvaluationReport(float(per_class.sum()), upd_total, resp_total, per_class, len(requests),
                            planner, seed, dict(parameters or {}, M=space.M))


# -- experiments ---------------------------------------------------------------

SWEEPS = ("network-size", "pt-count", "storage")
RESULT_FIELDS = ("sweep_value", "seed", "planner", "mode", "theta", "total_gain_ms", "update_gain_ms",
                 "response_gain_ms", "solve_ms", "status")


def default_sweep_values(sweep: str, params: GeneratorParams) -> list[float]:
    if sweep == "network-size":
        return [2, 3, 4, 5, 6]
    if sweep == "pt-count":
        return [2, 3, 4, 5, 6]
    if sweep == "storage":
        # 2 GB up to twice the largest possible total model size
        top = 2.0 * params.M * params.model_gb[1]
        return [float(v) for v in np.arange(2.0, top + 1e-9, 2.0)]
    raise ValueError(f"unknown sweep {sweep!r}; expected one of {SWEEPS}")


def _point_params(sweep: str, value, params: GeneratorParams, seed: int) -> GeneratorParams:
    if sweep == "network-size":
        # a larger network serves more users: request volumes grow with V
        V = int(value)
        return replace(params, seed=seed, V=V, history_size=round(params.history_size * V / params.V),
                       future_size=round(params.future_size * V / params.V))
    if sweep == "pt-count":
        return replace(params, seed=seed, M=int(value))
    return replace(params, seed=seed)


def _with_capacity(scenario: Scenario, capacity: float) -> Scenario:
    return Scenario([EdgeServer(s.id, capacity) for s in scenario.servers], scenario.cloud_unit_latency,
                    scenario.inter_es_unit_latency, scenario.upload_unit_latency, scenario.pts)


def _fmt(x: float) -> str:
    return "" if x is None or (isinstance(x, float) and math.isnan(x)) else repr(float(x))


def run_point(sweep: str, value, params: GeneratorParams, seed: int,
              modes: Sequence[str] = ("robust-support", "exact-dual"), baseline_mode: str = "exact-dual",
              beta: float = 0.95, timing: bool = False, dump_model=None) -> list[dict]:
    """All planners on one (sweep value, seed) instance, as result rows."""
    p = _point_params(sweep, value, params, seed)
    scenario = generate_scenario(p)
    if sweep == "storage":
        scenario = _with_capacity(scenario, float(value))
    space = SampleSpace.of(scenario)
    p0 = historical_distribution(space, seed)
    history = generate_requests(scenario, space, p0, p.history_size, seed, p.horizon_ms, stream=3)
    future_dist = shift_distribution(p0, p.shift, seed)
    future = generate_requests(scenario, space, future_dist, p.future_size, seed, p.horizon_ms, stream=4)

    plans: list[tuple[str, Plan]] = []
    theta = math.nan
    for mode in modes:
        cfg = PlannerConfig(beta=beta, mode=mode)
        inputs = prepare_inputs(scenario, history, cfg)
        theta = inputs.ball.tolerance
        plans.append(("WDRO", _guarded(lambda: solve_plan(inputs, cfg), mode, theta)))
    cfg = PlannerConfig(beta=beta, mode=baseline_mode)
    inputs = prepare_inputs(scenario, history, cfg)
    plans.append(("Near-PT", near_pt_plan(scenario, space, inputs)))
    plans.append(("Near-RQ", near_rq_plan(scenario, space, history, inputs)))
    plans.append(("DRO-AVG", _guarded(lambda: dro_avg_plan(inputs, cfg), baseline_mode, inputs.ball.tolerance)))

    rows = []
    for name, plan in plans:
        row = {"sweep_value": value, "seed": seed, "planner": name, "mode": plan.mode, "theta": plan.theta,
               "total_gain_ms": math.nan, "update_gain_ms": math.nan, "response_gain_ms": math.nan,
               "solve_ms": plan.solve_ms if timing else None, "status": plan.status}
        if plan.status != "failed":
            rep = evaluate_plan(scenario, space, plan, future, name, seed)
            row.update(total_gain_ms=rep.total_utility_gain, update_gain_ms=rep.update_gain,
                       response_gain_ms=rep.response_gain)
        rows.append(row)
    return rows


def _guarded(solve, mode: str, theta: float) -> Plan:
    # a plan that failed to solve is reported as an all-cloud row with a flagged status
    try:
        return solve()
    except RuntimeError as exc:
        log.warning("planner failed (%s): %s", mode, exc)
        return Plan(np.zeros((0, 0), dtype=bool), np.zeros(0, dtype=np.int64), math.nan, mode, theta,
                    status="failed")


def run_experiment(sweep: str, params: GeneratorParams, seeds: int | Sequence[int],
                   values: Sequence | None = None, **kwargs) -> list[dict]:
    """Every (sweep value, seed) point, rows sorted by value, seed and planner order."""
    if sweep not in SWEEPS:
        raise ValueError(f"unknown sweep {sweep!r}; expected one of {SWEEPS}")
    seed_list = list(range(seeds)) if isinstance(seeds, int) else list(seeds)
    values = default_sweep_values(sweep, params) if values is None else list(values)
    rows = []
    for value in values:
        for seed in seed_list:
            t0 = time.perf_counter()
            rows.extend(run_point(sweep, value, params, seed, **kwargs))
            log.info("%s=%s seed=%d done in %.1fs", sweep, value, seed, time.perf_counter() - t0)
    order = {name: i for i, name in enumerate(("WDRO", "Near-PT", "Near-RQ", "DRO-AVG"))}
    rows.sort(key=lambda r: (r["sweep_value"], r["seed"], order[r["planner"]], r["mode"]))
    return rows


def results_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RESULT_FIELDS)
    for r in rows:
        v = float(r["sweep_value"])
        w.writerow([str(int(v)) if v.is_integer() else repr(v), r["seed"], r["planner"], r["mode"], _fmt(r["theta"]),
                    _fmt(r["total_gain_ms"]), _fmt(r["update_gain_ms"]), _fmt(r["response_gain_ms"]),
                    _fmt(r["solve_ms"]), r["status"]])
    return buf.getvalue()


def read_results(path) -> list[dict]:
    with open(path, newline="") as fh:
        out = []
        for r in csv.DictReader(fh):
            for key in ("theta", "total_gain_ms", "update_gain_ms", "response_gain_ms", "solve_ms"):
                r[key] = float(r[key]) if r[key] != "" else math.nan
            r["sweep_value"] = float(r["sweep_value"])
            r["seed"] = int(r["seed"])
            out.append(r)
        return out


def mean_gain(rows: Sequence[dict], planner: str, mode: str | None = None) -> dict:
    """Mean total gain per sweep value for one planner (optionally one mode)."""
    acc: dict = {}
    for r in rows:
        if r["planner"] != planner or (mode is not None and r["mode"] != mode):
            continue
        acc.setdefault(float(r["sweep_value"]), []).append(float(r["total_gain_ms"]))
    return {v: float(np.mean(g)) for v, g in sorted(acc.items())}
