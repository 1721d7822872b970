"""Tableau kernels for the simplex loop.

Two interchangeable implementations live here: numba-compiled loops and a
vectorised numpy path.  The numba path is used when numba imports cleanly and
``DTWDRO_DISABLE_NUMBA`` is unset (or ``0``).  Both skip zero entries of the
pivot row/column, which is where nearly all the time goes on the structured
planning models.
"""
import os

import numpy as np

_disabled = os.environ.get("DTWDRO_DISABLE_NUMBA", "0").lower() not in ("", "0", "false", "no")

try:
    if _disabled:
        raise ImportError
    from numba import njit
    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False


def pivot_numpy(T, d, r, j):
    """Pivot tableau ``T`` (and reduced-cost row ``d``) on entry (r, j), in place."""
    prow = T[r] / T[r, j]
    T[r] = prow
    col = T[:, j].copy()
    col[r] = 0.0
    rows = np.flatnonzero(col)
    cols = np.flatnonzero(prow)
    if rows.size:
        T[np.ix_(rows, cols)] -= np.outer(col[rows], prow[cols])
    dj = d[j]
    if dj != 0.0:
        d[cols] -= dj * prow[cols]


def ratio_test_numpy(alpha, beta, ub_basic, delta, piv_tol, feas_tol, bland, basis):
    """Bounded-variable ratio test (Harris two-pass).

    Returns ``(row, step, to_upper)``; ``row`` is -1 when no basic variable
    blocks the move.  The first pass finds the largest step that keeps every
    basic variable within ``feas_tol`` of its bounds; among rows whose exact
    ratio fits that step the largest |pivot| wins.  Under Bland's rule the
    exact minimum ratio is used and ties go to the smallest basic index.
    """
    a = delta * alpha
    steps = np.full(a.shape[0], np.inf)
    relaxed = np.full(a.shape[0], np.inf)
    down = a > piv_tol
    up = (a < -piv_tol) & np.isfinite(ub_basic)
    steps[down] = np.maximum(beta[down], 0.0) / a[down]
    relaxed[down] = (np.maximum(beta[down], 0.0) + feas_tol) / a[down]
    gap = np.maximum(ub_basic[up] - beta[up], 0.0)
    steps[up] = gap / (-a[up])
    relaxed[up] = (gap + feas_tol) / (-a[up])
    if steps.size == 0 or not np.isfinite(steps.min()):
        return -1, np.inf, False
    if bland:
        ties = np.flatnonzero(steps <= steps.min() + 1e-12)
        ties = ties[np.abs(a[ties]) >= 1e-7 * np.abs(a[ties]).max()]
        r = ties[np.argmin(basis[ties])]
    else:
        fits = np.flatnonzero(steps <= relaxed.min())
        r = fits[np.argmax(np.abs(a[fits]))]
    return int(r), float(steps[r]), bool(a[r] < 0)


if HAS_NUMBA:

    @njit(cache=True)
    def pivot_numba(T, d, r, j):
        m, n = T.shape
        piv = T[r, j]
        nzc = np.empty(n, np.int64)
        cnt = 0
        for k in range(n):
            v = T[r, k]
            if v != 0.0:
                T[r, k] = v / piv
                nzc[cnt] = k
                cnt += 1
        for i in range(m):
            if i == r:
                continue
            f = T[i, j]
            if f != 0.0:
                for q in range(cnt):
                    k = nzc[q]
                    T[i, k] -= f * T[r, k]
        f = d[j]
        if f != 0.0:
            for q in range(cnt):
                k = nzc[q]
                d[k] -= f * T[r, k]

    @njit(cache=True)
    def ratio_test_numba(alpha, beta, ub_basic, delta, piv_tol, feas_tol, bland, basis):
        m = alpha.shape[0]
        steps = np.full(m, np.inf)
        best = np.inf
        limit = np.inf
        for i in range(m):
            a = delta * alpha[i]
            if a > piv_tol:
                b = beta[i] if beta[i] > 0.0 else 0.0
                steps[i] = b / a
                rel = (b + feas_tol) / a
            elif a < -piv_tol and np.isfinite(ub_basic[i]):
                g = ub_basic[i] - beta[i]
                g = g if g > 0.0 else 0.0
                steps[i] = g / (-a)
                rel = (g + feas_tol) / (-a)
            else:
                continue
            if steps[i] < best:
                best = steps[i]
            if rel < limit:
                limit = rel
        if not np.isfinite(best):
            return -1, np.inf, False
        big = 0.0
        if bland:
            for i in range(m):
                if steps[i] <= best + 1e-12 and abs(alpha[i]) > big:
                    big = abs(alpha[i])
        r = -1
        for i in range(m):
            if bland:
                if steps[i] <= best + 1e-12 and abs(alpha[i]) >= 1e-7 * big and (r < 0 or basis[i] < basis[r]):
                    r = i
            elif steps[i] <= limit and (r < 0 or abs(alpha[i]) > abs(alpha[r])):
                r = i
        return r, steps[r], delta * alpha[r] < 0.0

    pivot = pivot_numba
    ratio_test = ratio_test_numba
else:
    pivot = pivot_numpy
    ratio_test = ratio_test_numpy

BACKEND = "numba" if HAS_NUMBA else "numpy"
