"""Command-line interface: solve one problem, run benchmark batches, and
compute performance profiles from recorded batches."""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from typing import List, Optional

from .core import SolverConfig, Status
from .harness import (
    DEFAULT_TAU_GRID,
    EmptyIntersectionError,
    performance_profile,
    read_records,
    run_batch,
    write_profile,
    write_records,
)
from .problems import get_problem, registry
from .solvers import SOLVERS

USAGE_ERROR = 2


def _build_config(args) -> SolverConfig:
    data = {}
    if args.config:
        data.update(dataclasses.asdict(SolverConfig.from_file(args.config)))
    for item in args.param or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise ValueError(f"bad --param {item!r}; expected key=value")
        data[key.strip()] = value.strip()
    return SolverConfig.from_mapping(data)


def _select_problems(selection: str):
    if selection == "all":
        return registry()
    return [get_problem(item) for item in selection.split(",") if item]


def cmd_solve(args) -> int:
    try:
        config = _build_config(args)
        problem = get_problem(args.problem)
    except (KeyError, ValueError, OSError) as exc:
        args.parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    trace = [] if args.trace else None
    report = SOLVERS[args.solver](problem.objective, problem.x0, config, trace=trace)
    if args.trace:
        with open(args.trace, "w") as handle:
            for record in trace:
                handle.write(record.to_json() + "\n")
    print(json.dumps(report.to_dict(), indent=2))
    return 0 if report.status is Status.CONVERGED else 1


def cmd_bench(args) -> int:
    try:
        config = _build_config(args)
        problems = _select_problems(args.problems)
        solvers = [s for s in args.solvers.split(",") if s]
        if not problems or not solvers:
            raise ValueError("problem and solver selections must be nonempty")
        for solver in solvers:
            if solver not in SOLVERS:
                raise ValueError(f"unknown solver: {solver!r}")
    except (KeyError, ValueError, OSError) as exc:
        args.parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    jobs = args.jobs
    env_jobs = os.environ.get("REGULUS_JOBS")
    if env_jobs:
        jobs = int(env_jobs)
    records = run_batch(problems, solvers, config, jobs=jobs)
    write_records(records, args.out)
    solved = sum(1 for r in records if r.status is Status.CONVERGED)
    print(f"wrote {len(records)} records to {args.out} ({solved} converged)")
    return 0


def cmd_profile(args) -> int:
    try:
        records = read_records(args.input)
        tau_grid = (
            [float(t) for t in args.tau.split(",")] if args.tau else DEFAULT_TAU_GRID
        )
        metric = {"nf": "n_f", "time": "wall_time"}[args.metric]
    except (KeyError, ValueError, OSError) as exc:
        args.parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    try:
        curves = performance_profile(records, metric, tau_grid, union=args.union)
    except EmptyIntersectionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    write_profile(curves, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="regulus",
        description="Limited-memory quasi-Newton solvers and a benchmark harness.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config_options(p):
        p.add_argument("--config", help="flat key = value config file")
        p.add_argument(
            "-p", "--param", action="append", metavar="KEY=VALUE",
            help="override one solver parameter (repeatable)",
        )

    p_solve = sub.add_parser("solve", help="run one solver on one problem")
    p_solve.add_argument("problem", help="problem name or name:n")
    p_solve.add_argument("--solver", choices=sorted(SOLVERS), default="rlbfgs")
    p_solve.add_argument("--trace", help="write a JSON-lines iteration trace here")
    add_config_options(p_solve)
    p_solve.set_defaults(func=cmd_solve, parser=p_solve)

    p_bench = sub.add_parser("bench", help="run a problems-by-solvers batch")
    p_bench.add_argument("--problems", default="all", help="'all' or comma list of name[:n]")
    p_bench.add_argument("--solvers", default=",".join(sorted(SOLVERS)), help="comma list")
    p_bench.add_argument("--out", required=True, help="records CSV path")
    p_bench.add_argument("--jobs", type=int, default=1,
                         help="parallel runs (REGULUS_JOBS overrides)")
    add_config_options(p_bench)
    p_bench.set_defaults(func=cmd_bench, parser=p_bench)

    p_profile = sub.add_parser("profile", help="distribution curves from records")
    p_profile.add_argument("--in", dest="input", required=True, help="records CSV path")
    p_profile.add_argument("--metric", choices=("nf", "time"), default="nf")
    p_profile.add_argument("--out", required=True, help="profile CSV path")
    p_profile.add_argument("--tau", help="comma list of tau grid values (>= 1)")
    p_profile.add_argument("--union", action="store_true",
                           help="rank over problems solved by at least one solver")
    p_profile.set_defaults(func=cmd_profile, parser=p_profile)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
