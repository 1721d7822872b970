"""Wasserstein ball around the reference distribution and worst-case expectations.

Everything here is a small LP handed to :mod:`dtwdro.lp`: the transport problem
behind the distance, the worst-case expectation over the ball, and its dual.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lp import EQ, GE, LE, LinearProgram, Status, solve_lp
from .requestlog import DiscreteDistribution


class InfeasibleTransport(ValueError):
    pass


def tolerance_theta(K: int, history_size: int, beta: float) -> float:
    """Radius of the ball that holds the true distribution with confidence ``beta``."""
    if K < 1 or history_size < 1:
        raise ValueError("need K >= 1 and a non-empty history")
    if not 0.0 <= beta < 1.0:
        raise ValueError(f"confidence level must lie in [0, 1), got {beta}")
    return K * math.sqrt(2.0 / history_size * math.log(1.0 / (1.0 - beta)))


@dataclass(frozen=True, eq=False)
class WassersteinBall:
    reference: np.ndarray      # p0 over K classes
    tolerance: float           # theta
    cost: np.ndarray           # (K, K) ground cost

    def __post_init__(self):
        p0 = np.asarray(self.reference, dtype=float)
        DiscreteDistribution(p0)
        cost = np.asarray(self.cost, dtype=float)
        if cost.shape != (p0.size, p0.size):
            raise ValueError("cost matrix must be K x K")
        if np.any(cost < 0) or np.any(np.diag(cost) != 0):
            raise ValueError("ground cost must be non-negative with zero diagonal")
        if not self.tolerance >= 0:
            raise ValueError("tolerance must be non-negative")
        object.__setattr__(self, "reference", p0)
        object.__setattr__(self, "cost", cost)

    @property
    def K(self) -> int:
        return self.reference.size


@dataclass
class WorstCaseResult:
    value: float
    distribution: np.ndarray   # maximising P (row sums of the transport plan)
    transport: np.ndarray      # pi[k, j]: mass moved from reference atom j to atom k


def wasserstein_distance(p, q, cost) -> tuple[float, np.ndarray]:
    """Optimal transport cost between ``p`` (rows) and reference ``q`` (columns)."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    cost = np.asarray(cost, dtype=float)
    K = p.size
    if q.size != K or cost.shape != (K, K):
        raise ValueError("distributions and cost matrix disagree on K")
    if abs(p.sum() - q.sum()) > 1e-9 or np.any(p < -1e-12) or np.any(q < -1e-12):
        raise InfeasibleTransport("marginals must be non-negative with equal mass")
    lp = LinearProgram("min", "transport")
    idx = np.array([[lp.add_var(f"pi_{k}_{j}", obj=cost[k, j]) for j in range(K)] for k in range(K)])
    for j in range(K):
        lp.add_row({int(idx[k, j]): 1.0 for k in range(K)}, EQ, q[j], f"ref_{j}")
    for k in range(K):
        lp.add_row({int(idx[k, j]): 1.0 for j in range(K)}, EQ, p[k], f"mass_{k}")
    res = solve_lp(lp)
    if res.status != Status.OPTIMAL:
        raise InfeasibleTransport(f"transport LP ended {res.status.value}")
    return res.objective, res.x[idx]


def worst_case_expectation(psi, ball: WassersteinBall) -> WorstCaseResult:
    """max over P in the ball of E_P[psi], solved over transport plans."""
    psi = np.asarray(psi, dtype=float)
    K = ball.K
    if psi.shape != (K,):
        raise ValueError(f"psi must have length {K}")
    lp = LinearProgram("max", "worst_case")
    idx = np.array([[lp.add_var(f"pi_{k}_{j}", obj=psi[k]) for j in range(K)] for k in range(K)])
    for j in range(K):
        lp.add_row({int(idx[k, j]): 1.0 for k in range(K)}, EQ, ball.reference[j], f"ref_{j}")
    budget = {int(idx[k, j]): ball.cost[k, j] for k in range(K) for j in range(K) if ball.cost[k, j] != 0}
    lp.add_row(budget, LE, ball.tolerance, "budget")
    res = solve_lp(lp)
    if res.status != Status.OPTIMAL:
        raise RuntimeError(f"worst-case LP ended {res.status.value}")
    pi = np.maximum(res.x[idx], 0.0)
    return WorstCaseResult(res.objective, pi.sum(axis=1), pi)


def worst_case_dual(psi, ball: WassersteinBall) -> tuple[float, np.ndarray, float]:
    """Dual of :func:`worst_case_expectation`: returns ``(lam, h, value)``."""
    psi = np.asarray(psi, dtype=float)
    K = ball.K
    if psi.shape != (K,):
        raise ValueError(f"psi must have length {K}")
    lp = LinearProgram("min", "worst_case_dual")
    lam = lp.add_var("lam", 0.0, math.inf, ball.tolerance)
    h = [lp.add_var(f"h_{j}", -math.inf, math.inf, ball.reference[j]) for j in range(K)]
    for j in range(K):
        for k in range(K):
            coeffs = {h[j]: 1.0}
            if ball.cost[k, j] != 0:
                coeffs[lam] = ball.cost[k, j]
            lp.add_row(coeffs, GE, psi[k], f"cut_{j}_{k}")
    res = solve_lp(lp)
    if res.status != Status.OPTIMAL:
        raise RuntimeError(f"dual LP ended {res.status.value}")
    return float(res.x[lam]), res.x[h], res.objective
