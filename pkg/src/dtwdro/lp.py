"""Linear and mixed-binary programming kernel.

A dense-tableau primal simplex (two phases, bounded variables, Dantzig pricing
with a Bland fallback against cycling) and a best-first branch and bound on
top of it.  Models are built incrementally with :class:`LinearProgram`.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Iterable, Mapping

import numpy as np

from . import _kernels
from .config import DEFAULT_TOLERANCES, SolverTolerances

INF = math.inf
LE, EQ, GE = "<=", "=", ">="
_RELATIONS = (LE, EQ, GE)


class Status(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    ITERATION_LIMIT = "iteration-limit"


@dataclass
class Row:
    cols: np.ndarray
    vals: np.ndarray
    rel: str
    rhs: float
    name: str


class LinearProgram:
    """Variables with bounds, sparse constraint rows and a linear objective."""

    def __init__(self, sense: str = "min", name: str = "lp"):
        if sense not in ("min", "max"):
            raise ValueError(f"sense must be 'min' or 'max', got {sense!r}")
        self.sense = sense
        self.name = name
        self.obj: list[float] = []
        self.lb: list[float] = []
        self.ub: list[float] = []
        self.var_names: list[str] = []
        self.rows: list[Row] = []

    @property
    def n_vars(self) -> int:
        return len(self.obj)

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def add_var(self, name: str | None = None, lb: float = 0.0, ub: float = INF, obj: float = 0.0) -> int:
        if not (math.isfinite(obj) and not math.isnan(lb) and not math.isnan(ub)):
            raise ValueError("objective coefficient and bounds must be numbers")
        self.obj.append(float(obj))
        self.lb.append(float(lb))
        self.ub.append(float(ub))
        self.var_names.append(name or f"v{len(self.obj) - 1}")
        return len(self.obj) - 1

    def add_row(self, coeffs: Mapping[int, float] | Iterable[tuple[int, float]], rel: str,
                rhs: float, name: str | None = None) -> int:
        if rel not in _RELATIONS:
            raise ValueError(f"relation must be one of {_RELATIONS}, got {rel!r}")
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        merged: dict[int, float] = {}
        for j, v in items:
            if not 0 <= j < self.n_vars:
                raise IndexError(f"variable index {j} out of range")
            merged[int(j)] = merged.get(int(j), 0.0) + float(v)
        cols = np.array(sorted(merged), dtype=np.int64)
        vals = np.array([merged[j] for j in cols], dtype=float)
        if not (np.all(np.isfinite(vals)) and math.isfinite(rhs)):
            raise ValueError("row coefficients and rhs must be finite")
        self.rows.append(Row(cols, vals, rel, float(rhs), name or f"r{len(self.rows)}"))
        return len(self.rows) - 1

    def set_obj(self, j: int, coef: float) -> None:
        self.obj[j] = float(coef)

    def matrix(self) -> np.ndarray:
        A = np.zeros((self.n_rows, self.n_vars))
        for i, row in enumerate(self.rows):
            A[i, row.cols] = row.vals
        return A

    def objective_value(self, x) -> float:
        return float(np.dot(self.obj, x))

    def max_violation(self, x, lb=None, ub=None) -> float:
        """Largest bound or row violation of point ``x``."""
        x = np.asarray(x, dtype=float)
        lb = np.asarray(self.lb if lb is None else lb)
        ub = np.asarray(self.ub if ub is None else ub)
        worst = float(max(np.max(lb - x, initial=0.0), np.max(x - ub, initial=0.0)))
        for row in self.rows:
            lhs = float(np.dot(row.vals, x[row.cols]))
            if row.rel == LE:
                worst = max(worst, lhs - row.rhs)
            elif row.rel == GE:
                worst = max(worst, row.rhs - lhs)
            else:
                worst = max(worst, abs(lhs - row.rhs))
        return worst

    def listing(self, binaries: Iterable[int] = ()) -> str:
        """Plain-text equation listing, one constraint per line."""
        def term(c, j):
            sign = "-" if c < 0 else "+"
            return f"{sign} {abs(c):.12g} {self.var_names[j]}"

        lines = [f"\\ model {self.name}", "minimize" if self.sense == "min" else "maximize"]
        obj_terms = [term(c, j) for j, c in enumerate(self.obj) if c != 0.0]
        lines.append("  obj: " + (" ".join(obj_terms) if obj_terms else "0"))
        lines.append("subject to")
        for row in self.rows:
            lhs = " ".join(term(v, j) for j, v in zip(row.cols, row.vals)) or "0"
            lines.append(f"  {row.name}: {lhs} {row.rel} {row.rhs:.12g}")
        lines.append("bounds")
        for j in range(self.n_vars):
            lines.append(f"  {self.lb[j]:.12g} <= {self.var_names[j]} <= {self.ub[j]:.12g}")
        binaries = sorted(binaries)
        if binaries:
            lines.append("binary")
            lines.append("  " + " ".join(self.var_names[j] for j in binaries))
        lines.append("end")
        return "\n".join(lines) + "\n"


@dataclass
class MixedIntegerProgram:
    """A linear program in which some variables are restricted to {0, 1}."""
    lp: LinearProgram
    binaries: list[int] = field(default_factory=list)

    def add_binary(self, name: str | None = None, obj: float = 0.0) -> int:
        j = self.lp.add_var(name, 0.0, 1.0, obj)
        self.binaries.append(j)
        return j

    def listing(self) -> str:
        return self.lp.listing(self.binaries)


@dataclass
class SolveResult:
    status: Status
    x: np.ndarray | None = None
    objective: float = math.nan
    duals: np.ndarray | None = None       # LP only: d objective / d rhs, per row
    bound: float = math.nan              # MIP only: best bound at termination
    iterations: int = 0
    nodes: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == Status.OPTIMAL


# ----------------------------------------------------------------------------
# simplex


class _StandardForm:
    """min c.x  s.t.  A x = b,  0 <= x <= u, with a map back to the model."""

    def __init__(self, lp: LinearProgram, lb, ub):
        n = lp.n_vars
        m = lp.n_rows
        sgn = 1.0 if lp.sense == "min" else -1.0
        c_model = sgn * np.asarray(lp.obj, dtype=float)
        A_model = lp.matrix()
        cols, costs, uppers = [], [], []
        self.pos = np.full(n, -1, dtype=np.int64)
        self.neg = np.full(n, -1, dtype=np.int64)
        self.flip = np.ones(n)
        self.offset = np.zeros(n)
        shift = np.zeros(n)
        for j in range(n):
            lo, hi = lb[j], ub[j]
            if math.isfinite(lo):
                self.pos[j] = len(cols)
                cols.append(A_model[:, j]); costs.append(c_model[j]); uppers.append(hi - lo)
                self.offset[j] = shift[j] = lo
            elif math.isfinite(hi):
                self.pos[j] = len(cols)
                self.flip[j] = -1.0
                cols.append(-A_model[:, j]); costs.append(-c_model[j]); uppers.append(INF)
                self.offset[j] = shift[j] = hi
            else:
                self.pos[j] = len(cols)
                cols.append(A_model[:, j]); costs.append(c_model[j]); uppers.append(INF)
                self.neg[j] = len(cols)
                cols.append(-A_model[:, j]); costs.append(-c_model[j]); uppers.append(INF)
        n_struct = len(cols)
        b = np.array([row.rhs for row in lp.rows], dtype=float) - A_model @ shift
        self.const = float(c_model @ shift)
        # slacks
        self.slack_of_row = np.full(m, -1, dtype=np.int64)
        for i, row in enumerate(lp.rows):
            if row.rel != EQ:
                e = np.zeros(m)
                e[i] = 1.0 if row.rel == LE else -1.0
                self.slack_of_row[i] = len(cols)
                cols.append(e); costs.append(0.0); uppers.append(INF)
        # rows are sign-flipped so that b >= 0; a zero-rhs >= row is flipped too,
        # which lets its slack start in the basis
        ge = np.array([row.rel == GE for row in lp.rows], dtype=bool)
        self.sigma = np.where((b < 0) | ((b == 0) & ge), -1.0, 1.0)
        A = np.column_stack(cols) if cols else np.zeros((m, 0))
        A = A.reshape(m, len(cols)) * self.sigma[:, None]
        self.A = A
        self.b = b * self.sigma
        self.c = np.asarray(costs, dtype=float)
        self.u = np.asarray(uppers, dtype=float)
        self.n_struct = n_struct
        self.sgn = sgn

    def recover(self, xs: np.ndarray) -> np.ndarray:
        x = self.offset + self.flip * xs[self.pos]
        has_neg = self.neg >= 0
        x[has_neg] -= xs[self.neg[has_neg]]
        return x


class _Tableau:
    """Working state of one bounded-variable simplex solve.

    ``T`` holds B^-1 [A | I_art], ``beta`` the basic values, ``status`` is -1
    for basic columns and 0/1 for nonbasic columns at their lower/upper bound.
    """

    def __init__(self, full, b, art_cols, init_cols, u, tol: SolverTolerances):
        self.full = full
        self.b = b
        self.tol = tol
        self.u = u
        self.T = full.copy()
        self.beta = b.copy()
        self.basis = init_cols.copy()
        self.init_cols = init_cols
        self.status = np.zeros(full.shape[1], dtype=np.int64)
        self.status[self.basis] = -1
        self.art_cols = art_cols
        self.iterations = 0

    def reinvert(self, c):
        """Recompute tableau, basic values and reduced costs from the original columns."""
        B = self.full[:, self.basis]
        at_hi = np.flatnonzero(self.status == 1)
        rhs = self.b - self.full[:, at_hi] @ self.u[at_hi]
        try:
            sol = np.linalg.solve(B, np.column_stack([self.full, rhs]))
        except np.linalg.LinAlgError:
            return False
        self.T = sol[:, :-1]
        self.beta = sol[:, -1]
        self.d = c - c[self.basis] @ self.T
        return True

    def reduced_costs(self, c):
        self.d = c - c[self.basis] @ self.T

    def perturb(self):
        """Nudge basic values at a bound into the interior by small, fixed amounts.

        This amounts to solving with a slightly shifted right-hand side, which
        breaks ties in the ratio test on highly degenerate models.
        """
        size = self.tol.perturbation * max(1.0, float(np.max(np.abs(self.b), initial=0.0)))
        if size <= 0.0:
            return
        eps = size * (1.0 + np.random.default_rng(0).random(self.beta.size))
        ub = self.u[self.basis]
        room = ub > 4.0 * eps
        lo_side = room & (self.beta < eps)
        hi_side = room & ~lo_side & (ub - self.beta < eps)
        self.beta[lo_side] += eps[lo_side]
        self.beta[hi_side] -= eps[hi_side]

    def restore(self):
        """Recompute basic values for the true right-hand side."""
        at_hi = np.flatnonzero(self.status == 1)
        rhs = self.b - self.full[:, at_hi] @ self.u[at_hi]
        self.beta[:] = self.T[:, self.init_cols] @ rhs

    def dual_cleanup(self, allowed, budget):
        """Dual simplex pivots that remove small primal infeasibilities, keeping d optimal."""
        tol = self.tol
        feas = tol.feasibility * 1e-2
        it = 0
        while True:
            ub_basic = self.u[self.basis]
            below = -self.beta
            above = np.where(np.isfinite(ub_basic), self.beta - ub_basic, -INF)
            viol = np.maximum(below, above)
            r = int(np.argmax(viol)) if viol.size else 0
            if viol.size == 0 or viol[r] <= feas:
                self.iterations += it
                return "optimal"
            if it >= budget:
                self.iterations += it
                return "limit"
            raise_it = below[r] >= above[r]
            row = self.T[r]
            delta = np.where(self.status == 1, -1.0, 1.0)
            change = -delta * row            # d beta_r per unit move of x_j
            piv = tol.pivot * max(1.0, float(np.abs(row).max()))
            ok = allowed & (self.status != -1) & ((change > piv) if raise_it else (change < -piv))
            cand = np.flatnonzero(ok)
            if cand.size == 0:
                self.iterations += it
                return "infeasible"
            ratios = np.abs(self.d[cand]) / np.abs(row[cand])
            best = ratios.min()
            ties = cand[ratios <= best + tol.optimality]
            j = int(ties[np.argmax(np.abs(row[ties]))])
            target = 0.0 if raise_it else ub_basic[r]
            move = (target - self.beta[r]) / change[j]
            entering = (0.0 if self.status[j] == 0 else self.u[j]) + delta[j] * move
            self.beta -= (delta[j] * move) * self.T[:, j]
            leaving = self.basis[r]
            self.status[leaving] = 0 if raise_it else 1
            self.beta[r] = entering
            self.basis[r] = j
            self.status[j] = -1
            _kernels.pivot(self.T, self.d, r, j)
            it += 1

    def run(self, allowed, budget):
        """Iterate to optimality; returns 'optimal', 'unbounded' or 'limit'."""
        tol = self.tol
        T, beta, basis, status, d, u = self.T, self.beta, self.basis, self.status, self.d, self.u
        ub_basic = u[basis]
        degenerate = 0
        it = 0
        while True:
            bland = degenerate >= tol.bland_after
            elig = allowed & (((status == 0) & (d < -tol.optimality)) | ((status == 1) & (d > tol.optimality)))
            cand = np.flatnonzero(elig)
            if cand.size == 0:
                self.iterations += it
                return "optimal"
            if it >= budget:
                self.iterations += it
                return "limit"
            j = int(cand[0]) if bland else int(cand[np.argmax(np.abs(d[cand]))])
            delta = 1.0 if status[j] == 0 else -1.0
            alpha = T[:, j]
            piv_tol = tol.pivot * max(1.0, float(np.abs(alpha).max()))
            r, step, to_upper = _kernels.ratio_test(alpha, beta, ub_basic, delta, piv_tol,
                                                    tol.feasibility * 1e-2, bland, basis)
            flip_step = u[j]
            it += 1
            if r < 0 and not math.isfinite(flip_step):
                self.iterations += it
                return "unbounded"
            if r < 0 or flip_step <= step:
                beta -= (delta * flip_step) * alpha
                status[j] = 1 - status[j]
                degenerate = 0 if flip_step > 1e-12 else degenerate + 1
                continue
            entering_value = (0.0 if status[j] == 0 else u[j]) + delta * step
            beta -= (delta * step) * alpha
            leaving = basis[r]
            status[leaving] = 1 if (to_upper and math.isfinite(u[leaving])) else 0
            beta[r] = entering_value
            basis[r] = j
            ub_basic[r] = u[j]
            status[j] = -1
            _kernels.pivot(T, d, r, j)
            degenerate = degenerate + 1 if step <= 1e-12 else 0


def _phase(tab: _Tableau, c, allowed, tol: SolverTolerances) -> str:
    """Run one simplex phase; reinvert and continue if the end state has drifted."""
    tab.reduced_costs(c)
    perturbed = tol.perturbation > 0.0
    if perturbed:
        tab.perturb()
    for _ in range(5):
        state = tab.run(allowed, tol.max_iterations - tab.iterations)
        if state != "optimal" and not (perturbed and state == "unbounded"):
            return state
        if perturbed:
            perturbed = False
            tab.restore()
            state = tab.dual_cleanup(allowed, tol.max_iterations - tab.iterations)
            if state == "limit":
                return state
            if state == "infeasible":
                return "retry"
            continue
        x = np.where(tab.status == 1, tab.u, 0.0)
        x[tab.basis] = tab.beta
        x[~np.isfinite(x)] = 0.0
        scale = 1.0 + float(np.max(np.abs(tab.b), initial=0.0))
        resid = float(np.max(np.abs(tab.full @ x - tab.b), initial=0.0))
        y = c[tab.basis] @ tab.T[:, tab.init_cols]
        drift = float(np.max(np.abs((c - y @ tab.full) - tab.d), initial=0.0))
        if resid <= 1e-9 * scale and drift <= tol.optimality:
            return "optimal"
        if not tab.reinvert(c):
            return state
    return state


def _crash(tab: _Tableau, A, art_rows, N: int, tol: SolverTolerances) -> None:
    """Swap structural columns in for artificials where that keeps the basis trivially valid.

    A column qualifies for row ``i`` when its only other nonzeros sit in rows
    whose basic variable is a slack, its value ``b_i / a_ij`` lies within its
    bounds and no slack is pushed negative.  The crash columns then form a
    diagonal block, so the start basis stays nonsingular.  Replaced
    artificials are pinned at zero.
    """
    if not art_rows:
        return
    slack_row = tab.basis < N
    used = np.zeros(A.shape[1], dtype=bool)
    used[tab.basis[slack_row]] = True
    # column-wise nonzero structure, built once
    cols_nz, rows_nz = np.nonzero(A.T)
    starts = np.searchsorted(cols_nz, np.arange(A.shape[1] + 1))
    scratch = np.zeros(tab.T.shape[1])
    for a, i in enumerate(art_rows):
        for j in np.flatnonzero(A[i]):
            if used[j]:
                continue
            rows = rows_nz[starts[j]:starts[j + 1]]
            others = rows[rows != i]
            if not np.all(slack_row[others]):
                continue
            val = tab.beta[i] / A[i, j]
            if val < 0.0 or val > tab.u[j]:
                continue
            if val != 0.0:
                if np.any(tab.beta[others] - A[others, j] * val < -tol.feasibility * 1e-2):
                    continue
                tab.beta[others] -= A[others, j] * val
            tab.beta[i] = val
            _kernels.pivot(tab.T, scratch, i, j)
            art = N + a
            tab.status[art] = 0
            tab.u[art] = 0.0
            tab.status[j] = -1
            tab.basis[i] = j
            used[j] = True
            break


def solve_lp(lp: LinearProgram, tol: SolverTolerances = DEFAULT_TOLERANCES, lb=None, ub=None) -> SolveResult:
    """Solve ``lp``; ``lb``/``ub`` override the model's variable bounds."""
    lb = np.asarray(lp.lb if lb is None else lb, dtype=float)
    ub = np.asarray(lp.ub if ub is None else ub, dtype=float)
    if np.any(lb > ub):
        return SolveResult(Status.INFEASIBLE)
    sf = _StandardForm(lp, lb, ub)
    m, N = sf.A.shape

    # initial basis: a +1 slack where available, else an artificial
    init_cols = np.empty(m, dtype=np.int64)
    art_rows = []
    for i in range(m):
        s = sf.slack_of_row[i]
        if s >= 0 and sf.A[i, s] > 0:
            init_cols[i] = s
        else:
            art_rows.append(i)
    n_art = len(art_rows)
    total = N + n_art
    full = np.zeros((m, total))
    full[:, :N] = sf.A
    for a, i in enumerate(art_rows):
        full[i, N + a] = 1.0
        init_cols[i] = N + a
    u = np.concatenate([sf.u, np.full(n_art, INF)])
    tab = _Tableau(full, sf.b, np.arange(N, total), init_cols, u, tol)
    _crash(tab, sf.A, art_rows, N, tol)
    allowed = u > 0.0

    if np.any(tab.basis >= N):
        c1 = np.zeros(total)
        c1[N:] = 1.0
        state = _phase(tab, c1, allowed, tol)
        if state == "retry":
            return solve_lp(lp, replace(tol, perturbation=0.0), lb, ub)
        if state == "limit":
            return SolveResult(Status.ITERATION_LIMIT, iterations=tab.iterations)
        infeas = float(np.sum(tab.beta[tab.basis >= N]))
        if infeas > tol.phase1 * max(1.0, float(np.max(np.abs(sf.b), initial=0.0))):
            return SolveResult(Status.INFEASIBLE, iterations=tab.iterations)
        # artificials are pinned at zero from here on
        u[N:] = 0.0
        allowed[N:] = False
        tab.status[N:][tab.status[N:] == 1] = 0

    c2 = np.concatenate([sf.c, np.zeros(n_art)])
    state = _phase(tab, c2, allowed, tol)
    if state == "retry":
        return solve_lp(lp, replace(tol, perturbation=0.0), lb, ub)
    if state == "limit":
        return SolveResult(Status.ITERATION_LIMIT, iterations=tab.iterations)
    if state == "unbounded":
        return SolveResult(Status.UNBOUNDED, iterations=tab.iterations)

    xs = np.where(tab.status == 1, u, 0.0)
    xs[tab.basis] = tab.beta
    x = np.clip(sf.recover(np.clip(xs[:N], 0.0, sf.u)), lb, ub)
    y_std = c2[tab.basis] @ tab.T[:, init_cols]
    duals = sf.sigma * y_std * sf.sgn
    return SolveResult(Status.OPTIMAL, x=x, objective=lp.objective_value(x), duals=duals,
                       iterations=tab.iterations)


# ----------------------------------------------------------------------------
# branch and bound


def solve_mip(mip: MixedIntegerProgram, tol: SolverTolerances = DEFAULT_TOLERANCES,
              start: Mapping[int, float] | None = None,
              heuristic: Callable[[np.ndarray], Mapping[int, float] | None] | None = None,
              heuristic_every: int = 10) -> SolveResult:
    """Best-first branch and bound over the binary variables of ``mip``.

    ``start`` optionally maps binaries to 0/1; those are fixed and the rest of
    the LP solved to seed the incumbent.  ``heuristic`` is called with the
    relaxation's solution at the root and every ``heuristic_every`` nodes and
    may return such an assignment too (the default rounds to nearest).
    Neither changes the bound, so optimality is still proven by the search.
    """
    lp = mip.lp
    sgn = 1.0 if lp.sense == "min" else -1.0
    bins = np.array(sorted(set(mip.binaries)), dtype=np.int64)
    lb = np.array(lp.lb, dtype=float)
    ub = np.array(lp.ub, dtype=float)
    if bins.size:
        lb[bins] = np.ceil(np.maximum(lb[bins], 0.0) - tol.integrality)
        ub[bins] = np.floor(np.minimum(ub[bins], 1.0) + tol.integrality)

    nodes = 0
    iterations = 0
    limit_hit = False
    incumbent = None
    inc_val = INF          # in minimisation orientation
    heap: list = []
    seq = 0

    def evaluate(lo, hi):
        nonlocal nodes, iterations, limit_hit, incumbent, inc_val, seq
        res = solve_lp(lp, tol, lo, hi)
        nodes += 1
        iterations += res.iterations
        if res.status == Status.ITERATION_LIMIT:
            limit_hit = True
            return res
        if res.status != Status.OPTIMAL:
            return res
        val = sgn * res.objective
        xb = res.x[bins]
        frac = np.abs(xb - np.round(xb))
        if frac.size == 0 or frac.max() <= tol.integrality:
            x = res.x.copy()
            x[bins] = np.round(xb)
            v = sgn * lp.objective_value(x)
            if v < inc_val:
                inc_val, incumbent = v, x
        else:
            heapq.heappush(heap, (val, seq, lo, hi, res.x))
            seq += 1
        return res

    def try_fixed(values: Mapping[int, float], lo, hi):
        nonlocal nodes, iterations, incumbent, inc_val
        lo2, hi2 = lo.copy(), hi.copy()
        for j, v in values.items():
            v = float(round(v))
            if v < lo[j] or v > hi[j]:
                return
            lo2[j] = hi2[j] = v
        res = solve_lp(lp, tol, lo2, hi2)
        iterations += res.iterations
        if res.status != Status.OPTIMAL:
            return
        xb = res.x[bins]
        if np.abs(xb - np.round(xb)).max(initial=0.0) > tol.integrality:
            return
        x = res.x.copy()
        x[bins] = np.round(xb)
        v = sgn * lp.objective_value(x)
        if v < inc_val:
            inc_val, incumbent = v, x

    def rounded(x):
        return {int(j): v for j, v in zip(bins, x[bins])}

    guess = heuristic or rounded
    if start:
        try_fixed({int(j): v for j, v in start.items()}, lb, ub)
    root = evaluate(lb, ub)
    if heap and heuristic_every:
        values = guess(heap[0][4])
        if values:
            try_fixed(values, lb, ub)
    if root.status == Status.UNBOUNDED:
        return SolveResult(Status.UNBOUNDED, nodes=nodes, iterations=iterations)
    if root.status == Status.ITERATION_LIMIT:
        return SolveResult(Status.ITERATION_LIMIT, nodes=nodes, iterations=iterations)

    pops = 0
    while heap:
        bound = heap[0][0]
        if incumbent is not None and inc_val - bound <= max(tol.abs_gap, tol.rel_gap * abs(inc_val)):
            break
        if nodes >= tol.max_nodes:
            limit_hit = True
            break
        _, _, lo, hi, x = heapq.heappop(heap)
        pops += 1
        if heuristic_every and pops % heuristic_every == 0:
            values = guess(x)
            if values:
                try_fixed(values, lb, ub)
        xb = x[bins]
        frac = np.abs(xb - np.round(xb))
        k = int(bins[np.argmax(frac)])
        for side in (0.0, 1.0):
            lo2, hi2 = lo.copy(), hi.copy()
            lo2[k] = hi2[k] = side
            evaluate(lo2, hi2)

    best_bound = min(inc_val, heap[0][0]) if heap else inc_val
    if incumbent is None:
        status = Status.ITERATION_LIMIT if limit_hit else Status.INFEASIBLE
        return SolveResult(status, nodes=nodes, iterations=iterations, bound=sgn * best_bound)
    status = Status.ITERATION_LIMIT if (limit_hit and heap and inc_val - heap[0][0] >
                                        max(tol.abs_gap, tol.rel_gap * abs(inc_val))) else Status.OPTIMAL
    return SolveResult(status, x=incumbent, objective=lp.objective_value(incumbent),
                       bound=sgn * best_bound, nodes=nodes, iterations=iterations)
