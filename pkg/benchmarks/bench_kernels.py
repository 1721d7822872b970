"""Compare the numba and numpy tableau kernels.

Kernel timings use both implementations in-process (the numba path needs numba
installed).  The end-to-end timing solves one planning model in two fresh
interpreters, with and without DTWDRO_DISABLE_NUMBA, since the backend is
chosen at import time.

    python benchmarks/bench_kernels.py [--rows 600] [--cols 1500] [--density 0.05]
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from dtwdro import _kernels

SOLVE_SNIPPET = """
import time
from dtwdro import _kernels
from dtwdro.harness import GeneratorParams, generate_scenario, generate_requests, historical_distribution
from dtwdro.planner import PlannerConfig, prepare_inputs, build_model
from dtwdro.requestlog import SampleSpace
from dtwdro.lp import solve_lp
p = GeneratorParams(seed=0, V={V}, M={M})
sc = generate_scenario(p); sp = SampleSpace.of(sc)
hist = generate_requests(sc, sp, historical_distribution(sp, 0), 500, 0)
cfg = PlannerConfig(mode="{mode}")
lp = build_model(prepare_inputs(sc, hist, cfg), cfg).lp
solve_lp(lp)                      # warm-up (jit / cache load)
t = time.perf_counter(); r = solve_lp(lp); dt = time.perf_counter() - t
print(_kernels.BACKEND, r.iterations, dt, r.objective)
"""


def random_tableau(rows, cols, density, rng):
    T = rng.standard_normal((rows, cols)) * (rng.random((rows, cols)) < density)
    T[np.arange(rows), rng.integers(0, cols, rows)] += 1.0
    return T


def bench_pivot(rows, cols, density, repeat):
    rng = np.random.default_rng(0)
    T0 = random_tableau(rows, cols, density, rng)
    d0 = rng.standard_normal(cols)
    r, j = 0, int(np.argmax(np.abs(T0[0])))
    out = {}
    impls = [("numpy", _kernels.pivot_numpy)]
    if _kernels.HAS_NUMBA:
        _kernels.pivot_numba(T0.copy(), d0.copy(), r, j)
        impls.append(("numba", _kernels.pivot_numba))
    for name, fn in impls:
        def run():
            fn(T0.copy(), d0.copy(), r, j)
        copy_cost = min(timeit.repeat(lambda: (T0.copy(), d0.copy()), number=1, repeat=repeat))
        out[name] = min(timeit.repeat(run, number=1, repeat=repeat)) - copy_cost
    return out


def bench_ratio(rows, repeat):
    rng = np.random.default_rng(1)
    alpha = rng.standard_normal(rows)
    beta = np.abs(rng.standard_normal(rows))
    beta[rng.random(rows) < 0.3] = 0.0          # degenerate rows
    ub = np.where(rng.random(rows) < 0.2, 1.0 + np.abs(rng.standard_normal(rows)), np.inf)
    basis = rng.permutation(rows * 3)[:rows].astype(np.int64)
    args = (alpha, beta, ub, 1.0, 1e-9, 1e-9, False, basis)
    out = {"numpy": min(timeit.repeat(lambda: _kernels.ratio_test_numpy(*args), number=20, repeat=repeat)) / 20}
    if _kernels.HAS_NUMBA:
        _kernels.ratio_test_numba(*args)
        out["numba"] = min(timeit.repeat(lambda: _kernels.ratio_test_numba(*args), number=20, repeat=repeat)) / 20
        assert _kernels.ratio_test_numba(*args) == _kernels.ratio_test_numpy(*args)
    return out


def bench_solve(V, M, mode):
    results = {}
    for disable in ("0", "1"):
        env = dict(os.environ, DTWDRO_DISABLE_NUMBA=disable)
        proc = subprocess.run([sys.executable, "-c", SOLVE_SNIPPET.format(V=V, M=M, mode=mode)],
                              env=env, capture_output=True, text=True, check=True)
        backend, iters, dt, obj = proc.stdout.split()
        results[backend] = (int(iters), float(dt), float(obj))
    return results


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rows", type=int, default=600)
    ap.add_argument("--cols", type=int, default=1500)
    ap.add_argument("--density", type=float, default=0.05)
    ap.add_argument("--repeat", type=int, default=7)
    ap.add_argument("--solve", default="4,3,robust-support", help="V,M,mode for the end-to-end LP")
    args = ap.parse_args()

    print(f"backend at import: {_kernels.BACKEND}")
    piv = bench_pivot(args.rows, args.cols, args.density, args.repeat)
    print(f"pivot {args.rows}x{args.cols} density {args.density}: "
          + ", ".join(f"{k} {v * 1e3:.3f} ms" for k, v in piv.items()))
    rt = bench_ratio(args.rows, args.repeat)
    print(f"ratio test m={args.rows}: " + ", ".join(f"{k} {v * 1e6:.1f} us" for k, v in rt.items()))
    if args.solve:
        V, M, mode = args.solve.split(",")
        res = bench_solve(int(V), int(M), mode)
        for backend, (iters, dt, obj) in sorted(res.items()):
            print(f"solve_lp {mode} V={V} M={M} [{backend}]: {iters} pivots, {dt:.3f} s, objective {obj:.9g}")
        objs = [v[2] for v in res.values()]
        if len(objs) == 2 and abs(objs[0] - objs[1]) > 1e-6 * (1 + abs(objs[0])):
            print("WARNING: backends disagree on the objective")


if __name__ == "__main__":
    main()
