"""Edge/cloud topology, physical-twin catalogue and the AoI / latency formulas.

Units: milliseconds, MB for transferred data, GB for storage; every unit
latency is in ms/MB.  Server and PT indices are 0-based in the API and
1-based in JSON.  ``CLOUD`` stands for the cloud server wherever a serving
node is expected.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

CLOUD = -1


@dataclass(frozen=True)
class EdgeServer:
    id: int
    storage_capacity: float   # GB

    def __post_init__(self):
        if not self.storage_capacity > 0:
            raise ValueError(f"server {self.id}: storage capacity must be positive")


@dataclass(frozen=True)
class PhysicalTwin:
    id: int
    location: int             # index of the local edge server
    update_size: float        # MB per update
    update_period: float      # ms between updates
    storage_cost: float       # GB to host one DT model
    response_size: float      # MB, nominal service response size

    def __post_init__(self):
        for name in ("update_size", "update_period", "storage_cost", "response_size"):
            if not getattr(self, name) > 0:
                raise ValueError(f"PT {self.id}: {name} must be positive")


@dataclass(frozen=True, eq=False)
class Scenario:
    servers: list[EdgeServer]
    cloud_unit_latency: np.ndarray       # (V,) ms/MB, edge server -> cloud
    inter_es_unit_latency: np.ndarray    # (V, V) ms/MB through the core network
    upload_unit_latency: float           # ms/MB, PT -> its local server
    pts: list[PhysicalTwin] = field(default_factory=list)

    def __post_init__(self):
        cloud = np.asarray(self.cloud_unit_latency, dtype=float)
        inter = np.asarray(self.inter_es_unit_latency, dtype=float)
        V = len(self.servers)
        if cloud.shape != (V,):
            raise ValueError(f"cloud_unit_latency must have length {V}")
        if inter.shape != (V, V):
            raise ValueError(f"inter_es_unit_latency must be {V}x{V}")
        if np.any(inter < 0) or np.any(np.diag(inter) != 0):
            raise ValueError("inter_es_unit_latency must be non-negative with zero diagonal")
        if np.any(cloud < 0) or self.upload_unit_latency < 0:
            raise ValueError("unit latencies must be non-negative")
        for pt in self.pts:
            if not 0 <= pt.location < V:
                raise ValueError(f"PT {pt.id}: location {pt.location} is not a server index")
        cloud.setflags(write=False)
        inter.setflags(write=False)
        object.__setattr__(self, "cloud_unit_latency", cloud)
        object.__setattr__(self, "inter_es_unit_latency", inter)

    @property
    def V(self) -> int:
        return len(self.servers)

    @property
    def M(self) -> int:
        return len(self.pts)

    @property
    def capacities(self) -> np.ndarray:
        return np.array([s.storage_capacity for s in self.servers], dtype=float)

    @property
    def storage_costs(self) -> np.ndarray:
        return np.array([p.storage_cost for p in self.pts], dtype=float)

    # -- serialisation ---------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "upload_unit_latency": float(self.upload_unit_latency),
            "inter_es_unit_latency": [[float(v) for v in row] for row in self.inter_es_unit_latency],
            "cloud_unit_latency": [float(v) for v in self.cloud_unit_latency],
            "servers": [{"id": s.id + 1, "storage_gb": float(s.storage_capacity)} for s in self.servers],
            "pts": [
                {
                    "id": p.id + 1,
                    "location": p.location + 1,
                    "update_mb": float(p.update_size),
                    "period_ms": float(p.update_period),
                    "storage_gb": float(p.storage_cost),
                    "response_mb": float(p.response_size),
                }
                for p in self.pts
            ],
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_dict(cls, data: dict) -> "Scenario":
        servers = sorted(data["servers"], key=lambda s: s["id"])
        pts = sorted(data["pts"], key=lambda p: p["id"])
        return cls(
            servers=[EdgeServer(i, float(s["storage_gb"])) for i, s in enumerate(servers)],
            cloud_unit_latency=np.asarray(data["cloud_unit_latency"], dtype=float),
            inter_es_unit_latency=np.asarray(data["inter_es_unit_latency"], dtype=float).reshape(
                len(servers), len(servers)),
            upload_unit_latency=float(data["upload_unit_latency"]),
            pts=[
                PhysicalTwin(i, int(p["location"]) - 1, float(p["update_mb"]), float(p["period_ms"]),
                             float(p["storage_gb"]), float(p["response_mb"]))
                for i, p in enumerate(pts)
            ],
        )

    @classmethod
    def from_json(cls, text: str) -> "Scenario":
        return cls.from_dict(json.loads(text))

    # -- index checks ----------------------------------------------------------

    def _pt(self, m: int) -> PhysicalTwin:
        if not 0 <= m < self.M:
            raise IndexError(f"PT index {m} out of range [0, {self.M})")
        return self.pts[m]

    def _server(self, g: int) -> int:
        if not 0 <= g < self.V:
            raise IndexError(f"server index {g} out of range [0, {self.V})")
        return g

    def _node(self, g: int) -> int:
        return g if g == CLOUD else self._server(g)


def update_latency(scenario: Scenario, m: int, g: int) -> float:
    """Delivery latency of one update of PT ``m`` to its DT model on server ``g``."""
    pt = scenario._pt(m)
    scenario._server(g)
    if pt.location == g:
        return pt.update_size * scenario.upload_unit_latency
    return pt.update_size * (scenario.upload_unit_latency + scenario.inter_es_unit_latency[pt.location, g])


def update_latency_cloud(scenario: Scenario, m: int) -> float:
    # no upload term on the cloud path
    pt = scenario._pt(m)
    return pt.update_size * scenario.cloud_unit_latency[pt.location]


def _sawtooth(t: float, period: float) -> float:
    if t < 0:
        raise ValueError(f"time must be non-negative, got {t}")
    n = math.floor(t / period)
    return t - n * period


def aoi_dt_edge(scenario: Scenario, m: int, g: int, t: float) -> float:
    """AoI at time ``t`` of the DT model of PT ``m`` kept on server ``g``."""
    return update_latency(scenario, m, g) + _sawtooth(t, scenario._pt(m).update_period)


def aoi_dt_cloud(scenario: Scenario, m: int, t: float) -> float:
    return update_latency_cloud(scenario, m) + _sawtooth(t, scenario._pt(m).update_period)


def response_latency(scenario: Scenario, source: int, dest: int, size: float) -> float:
    """Latency of shipping a ``size`` MB response from ``source`` (server or CLOUD) to ``dest``."""
    if size < 0:
        raise ValueError(f"response size must be non-negative, got {size}")
    scenario._server(dest)
    if scenario._node(source) == CLOUD:
        return size * scenario.cloud_unit_latency[dest]
    if source == dest:
        return 0.0
    return size * scenario.inter_es_unit_latency[source, dest]


def response_aoi(scenario: Scenario, m: int, g: int, loc: int, size: float, t: float) -> float:
    """AoI of the response delivered at ``loc`` for a request issued at time ``t``."""
    if g == CLOUD:
        return aoi_dt_cloud(scenario, m, t) + response_latency(scenario, CLOUD, loc, size)
    return aoi_dt_edge(scenario, m, g, t) + response_latency(scenario, g, loc, size)


def utility_gain(scenario: Scenario, m: int, g: int, loc: int, size: float) -> float:
    """AoI saved by serving the request from ``g`` instead of the cloud.

    The request time cancels, so the gain is the update-latency difference
    plus the response-latency difference.
    """
    scenario._pt(m)
    scenario._server(loc)
    if scenario._node(g) == CLOUD:
        return 0.0
    upd = update_latency_cloud(scenario, m) - update_latency(scenario, m, g)
    resp = response_latency(scenario, CLOUD, loc, size) - response_latency(scenario, g, loc, size)
    return upd + resp


def gain_components(scenario: Scenario, m: int, g: int, loc: int, size: float) -> tuple[float, float]:
    """``utility_gain`` split into (update part, response part)."""
    if scenario._node(g) == CLOUD:
        return 0.0, 0.0
    upd = update_latency_cloud(scenario, m) - update_latency(scenario, m, g)
    resp = response_latency(scenario, CLOUD, loc, size) - response_latency(scenario, g, loc, size)
    return upd, resp


def update_latency_table(scenario: Scenario) -> np.ndarray:
    """(M, V+1) update latencies; the last column is the cloud."""
    out = np.empty((scenario.M, scenario.V + 1))
    for m in range(scenario.M):
        for g in range(scenario.V):
            out[m, g] = update_latency(scenario, m, g)
        out[m, -1] = update_latency_cloud(scenario, m)
    return out


def response_unit_table(scenario: Scenario) -> np.ndarray:
    """(V+1, V) unit response latency from each node (last row: cloud) to each location."""
    out = np.empty((scenario.V + 1, scenario.V))
    out[:-1] = scenario.inter_es_unit_latency
    np.fill_diagonal(out[:-1], 0.0)
    out[-1] = scenario.cloud_unit_latency
    return out
