"""Interaction requests, the (location, type) sample space and class features."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .network import CLOUD, Scenario, response_latency

CSV_FIELDS = ("time_ms", "location", "pt_type", "response_size_mb")
OPTIONAL_FIELDS = ("response_time_ms", "served_by")


@dataclass(frozen=True)
class Request:
    time: float               # ms
    location: int             # 0-based server index
    pt_type: int              # 0-based PT index
    response_size: float      # MB
    response_time: float | None = None   # recorded response latency, ms
    served_by: int | None = None         # recorded serving node (CLOUD for the cloud)


class SampleSpace:
    """Row-major bijection k <-> (location, type), K = V * M."""

    def __init__(self, V: int, M: int):
        if V < 1 or M < 1:
            raise ValueError("sample space needs V >= 1 and M >= 1")
        self.V, self.M = V, M

    @classmethod
    def of(cls, scenario: Scenario) -> "SampleSpace":
        return cls(scenario.V, scenario.M)

    @property
    def K(self) -> int:
        return self.V * self.M

    def index(self, location: int, pt_type: int) -> int:
        if not 0 <= location < self.V:
            raise IndexError(f"location {location} out of range [0, {self.V})")
        if not 0 <= pt_type < self.M:
            raise IndexError(f"PT type {pt_type} out of range [0, {self.M})")
        return location * self.M + pt_type

    def location(self, k: int) -> int:
        self._check(k)
        return k // self.M

    def pt_type(self, k: int) -> int:
        self._check(k)
        return k % self.M

    def cell(self, k: int) -> tuple[int, int]:
        return self.location(k), self.pt_type(k)

    def _check(self, k: int) -> None:
        if not 0 <= k < self.K:
            raise IndexError(f"class index {k} out of range [0, {self.K})")

    def __eq__(self, other):
        return isinstance(other, SampleSpace) and (self.V, self.M) == (other.V, other.M)

    def __repr__(self):
        return f"SampleSpace(V={self.V}, M={self.M})"


def class_of(space: SampleSpace, request: Request) -> int:
    return space.index(request.location, request.pt_type)


@dataclass(frozen=True, eq=False)
class DiscreteDistribution:
    p: np.ndarray

    def __post_init__(self):
        p = np.array(self.p, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("distribution must be a non-empty vector")
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
            raise ValueError("probabilities must be non-negative and sum to 1")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    @property
    def K(self) -> int:
        return self.p.size

    def __array__(self, dtype=None, copy=None):
        return self.p if dtype is None else self.p.astype(dtype)

    def __len__(self):
        return self.p.size

    @classmethod
    def uniform(cls, K: int) -> "DiscreteDistribution":
        return cls(np.full(K, 1.0 / K))


def class_counts(space: SampleSpace, log: Iterable[Request]) -> np.ndarray:
    counts = np.zeros(space.K, dtype=np.int64)
    for r in log:
        counts[class_of(space, r)] += 1
    return counts


def empirical_distribution(space: SampleSpace, log: Sequence[Request]) -> DiscreteDistribution:
    """Class frequencies of ``log``."""
    if len(log) == 0:
        raise ValueError("empirical distribution of an empty log")
    counts = class_counts(space, log)
    return DiscreteDistribution(counts / counts.sum())


@dataclass(frozen=True, eq=False)
class ClassFeatures:
    xi: np.ndarray        # (K, 2): mean response time (ms), mean response size (MB)
    counts: np.ndarray    # (K,) historical requests per class

    @property
    def T(self) -> np.ndarray:
        return self.xi[:, 0]

    @property
    def S(self) -> np.ndarray:
        return self.xi[:, 1]


def _response_time(scenario: Scenario, r: Request) -> float:
    if r.response_time is not None:
        return float(r.response_time)
    if r.served_by is not None:
        return response_latency(scenario, r.served_by, r.location, r.response_size)
    return response_latency(scenario, CLOUD, r.location, r.response_size)


def class_features(scenario: Scenario, space: SampleSpace, log: Sequence[Request]) -> ClassFeatures:
    """Per-class mean (response time, response size); empty classes get the log-wide means."""
    if len(log) == 0:
        raise ValueError("class features of an empty log")
    sums = np.zeros((space.K, 2))
    counts = np.zeros(space.K, dtype=np.int64)
    for r in log:
        k = class_of(space, r)
        sums[k, 0] += _response_time(scenario, r)
        sums[k, 1] += r.response_size
        counts[k] += 1
    global_mean = sums.sum(axis=0) / counts.sum()
    xi = np.empty_like(sums)
    seen = counts > 0
    xi[seen] = sums[seen] / counts[seen, None]
    xi[~seen] = global_mean
    return ClassFeatures(xi, counts)


def ground_cost_matrix(features: ClassFeatures | np.ndarray, norm: str = "l1") -> np.ndarray:
    """Pairwise distances between class feature vectors."""
    xi = features.xi if isinstance(features, ClassFeatures) else np.asarray(features, dtype=float)
    diff = xi[:, None, :] - xi[None, :, :]
    if norm == "l1":
        return np.abs(diff).sum(axis=-1)
    if norm == "l2":
        return np.sqrt((diff ** 2).sum(axis=-1))
    raise ValueError(f"unknown ground norm {norm!r}; expected 'l1' or 'l2'")


# -- CSV ----------------------------------------------------------------------


def read_requests(source) -> list[Request]:
    """Parse a request-log CSV (path or file object).  IDs are 1-based on disk."""
    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        with open(source, newline="") as fh:
            return read_requests(fh)
    reader = csv.DictReader(source)
    missing = [f for f in CSV_FIELDS if f not in (reader.fieldnames or ())]
    if missing:
        raise ValueError(f"request log is missing columns: {', '.join(missing)}")
    out = []
    for line in reader:
        rt = line.get("response_time_ms")
        sb = line.get("served_by")
        served = None
        if sb not in (None, ""):
            served = CLOUD if int(sb) == CLOUD else int(sb) - 1
        out.append(Request(
            time=float(line["time_ms"]),
            location=int(line["location"]) - 1,
            pt_type=int(line["pt_type"]) - 1,
            response_size=float(line["response_size_mb"]),
            response_time=None if rt in (None, "") else float(rt),
            served_by=served,
        ))
    return out


def write_requests(log: Sequence[Request], dest=None) -> str | None:
    """Write ``log`` as CSV to ``dest`` (path or file); returns the text when ``dest`` is None."""
    with_time = any(r.response_time is not None for r in log)
    with_served = any(r.served_by is not None for r in log)
    fields = list(CSV_FIELDS) + (["response_time_ms"] if with_time else []) + (
        ["served_by"] if with_served else [])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields)
    for r in log:
        row = [repr(float(r.time)), r.location + 1, r.pt_type + 1, repr(float(r.response_size))]
        if with_time:
            row.append("" if r.response_time is None else repr(float(r.response_time)))
        if with_served:
            row.append("" if r.served_by is None else (CLOUD if r.served_by == CLOUD else r.served_by + 1))
        w.writerow(row)
    text = buf.getvalue()
    if dest is None:
        return text
    if hasattr(dest, "write"):
        dest.write(text)
    else:
        with open(dest, "w", newline="") as fh:
            fh.write(text)
    return None
