"""Command-line entry point: ``dtwdro {gen,plan,evaluate,experiment}``."""
from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import replace

from .harness import (SWEEPS, GeneratorParams, evaluate_plan, generate_requests, generate_scenario,
                      historical_distribution, results_csv, run_experiment, shift_distribution)
from .network import Scenario
from .planner import MODES, Plan, PlannerConfig, build_model, prepare_inputs, solve_plan
from .requestlog import SampleSpace, read_requests, write_requests

log = logging.getLogger("dtwdro")


def _write(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _read(path: str) -> str:
    with open(path) as fh:
        return fh.read()


def cmd_gen(args) -> int:
    params = GeneratorParams(seed=args.seed, V=args.v, M=args.m, shift=args.shift)
    scenario = generate_scenario(params)
    _write(args.out, scenario.to_json() + "\n")
    space = SampleSpace.of(scenario)
    p0 = historical_distribution(space, args.seed)
    if args.history_out:
        hist = generate_requests(scenario, space, p0, args.history_size, args.seed, params.horizon_ms, stream=3)
        write_requests(hist, args.history_out)
    if args.future_out:
        q = shift_distribution(p0, args.shift, args.seed)
        fut = generate_requests(scenario, space, q, args.future_size, args.seed, params.horizon_ms, stream=4)
        write_requests(fut, args.future_out)
    return 0


def cmd_plan(args) -> int:
    scenario = Scenario.from_json(_read(args.scenario))
    history = read_requests(args.history)
    config = PlannerConfig(beta=args.beta, mode=args.mode, ground_norm=args.ground_norm,
                           theta_override=args.theta, support_margin=args.support_margin,
                           expected_request_count=args.request_count)
    inputs = prepare_inputs(scenario, history, config)
    if args.dump_model:
        if config.mode == "enumerate":
            log.warning("enumerate mode builds no model; nothing dumped")
        else:
            _write(args.dump_model, build_model(inputs, config).listing())
    plan = solve_plan(inputs, config)
    _write(args.out, plan.to_json() + "\n")
    log.info("objective %.6g (%s), theta %.4g, %.0f ms", plan.objective, plan.status, plan.theta, plan.solve_ms)
    return 0 if plan.optimal else 2


def cmd_evaluate(args) -> int:
    scenario = Scenario.from_json(_read(args.scenario))
    space = SampleSpace.of(scenario)
    plan = Plan.from_json(_read(args.plan), scenario)
    requests = read_requests(args.requests)
    report = evaluate_plan(scenario, space, plan, requests, planner=plan.mode)
    _write(args.out, report.to_csv())
    log.info("total %.6g ms (update %.6g, response %.6g) over %d requests", report.total_utility_gain,
             report.update_gain, report.response_gain, report.requests)
    return 0


def cmd_experiment(args) -> int:
    params = GeneratorParams(shift=args.shift, V=args.v, M=args.m)
    if args.history_size is not None:
        params = replace(params, history_size=args.history_size)
    if args.future_size is not None:
        params = replace(params, future_size=args.future_size)
    rows = run_experiment(args.sweep, params, args.seeds, values=args.values, modes=args.modes,
                          baseline_mode=args.baseline_mode, beta=args.beta, timing=args.timing)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, f"{args.sweep}.csv")
    _write(path, results_csv(rows))
    log.info("wrote %d rows to %s", len(rows), path)
    bad = [r for r in rows if r["status"] != "optimal"]
    return 2 if bad else 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dtwdro", description="Robust DT deployment planning over edge servers.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a random scenario (and optionally request logs)")
    g.add_argument("--preset", choices=["paper"], default="paper")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--v", type=int, default=4, help="number of edge servers")
    g.add_argument("--m", type=int, default=4, help="number of physical twins")
    g.add_argument("--shift", type=float, default=0.5, help="distribution shift of the future log")
    g.add_argument("--history-out")
    g.add_argument("--history-size", type=int, default=500)
    g.add_argument("--future-out")
    g.add_argument("--future-size", type=int, default=500)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    p = sub.add_parser("plan", help="solve for a robust deployment/selection plan")
    p.add_argument("--scenario", required=True)
    p.add_argument("--history", required=True)
    p.add_argument("--beta", type=float, default=0.95)
    p.add_argument("--mode", choices=MODES, default="robust-support")
    p.add_argument("--theta", type=float, default=None, help="override the ball radius")
    p.add_argument("--ground-norm", choices=["l1", "l2"], default="l1")
    p.add_argument("--support-margin", type=float, default=0.10)
    p.add_argument("--request-count", type=float, default=None)
    p.add_argument("--dump-model", metavar="FILE", help="write the MILP as a plain-text listing")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plan)

    e = sub.add_parser("evaluate", help="score a plan on a request log")
    e.add_argument("--scenario", required=True)
    e.add_argument("--plan", required=True)
    e.add_argument("--requests", required=True)
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_evaluate)

    x = sub.add_parser("experiment", help="run a parameter sweep and write a results CSV")
    x.add_argument("--sweep", choices=SWEEPS, required=True)
    x.add_argument("--seeds", type=int, default=20)
    x.add_argument("--shift", type=float, default=0.5)
    x.add_argument("--v", type=int, default=4)
    x.add_argument("--m", type=int, default=4)
    x.add_argument("--beta", type=float, default=0.95)
    x.add_argument("--values", type=float, nargs="+", help="sweep points (defaults depend on the sweep)")
    x.add_argument("--modes", nargs="+", choices=[m for m in MODES if m != "enumerate"],
                   default=["robust-support", "exact-dual"], help="WDRO solve modes")
    x.add_argument("--baseline-mode", choices=MODES, default="exact-dual", help="solve mode for DRO-AVG")
    x.add_argument("--history-size", type=int)
    x.add_argument("--future-size", type=int)
    x.add_argument("--timing", action="store_true", help="fill solve_ms (makes output run-dependent)")
    x.add_argument("--out", required=True, help="output directory")
    x.set_defaults(func=cmd_experiment)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        log.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
