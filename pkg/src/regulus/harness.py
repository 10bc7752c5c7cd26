"""Batch runner and performance-profile computation.

Runs solver-by-problem grids into flat records, persists them as CSV, and
computes the fraction-of-problems-solved-within-factor-tau distribution
curves used to compare solvers.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from .core import RunReport, SolverConfig, Status
from .problems import ProblemDef
from .solvers import SOLVERS

DEFAULT_TAU_GRID = (1.0, 1.25, 1.5, 2.0, 3.0, 5.0, 8.0, 13.0, 21.0)

CSV_FIELDS = (
    "problem",
    "solver",
    "status",
    "n_f",
    "n_g",
    "iterations",
    "wall_time",
    "final_residual",
)


class EmptyIntersectionError(Exception):
    """No problem was solved by every selected solver."""


@dataclass(frozen=True)
class RunRecord:
    """One (problem, solver) cell of a batch."""

    problem: str
    solver: str
    status: Status
    n_f: int
    n_g: int
    iterations: int
    wall_time: float
    final_residual: float

    @classmethod
    def from_report(cls, problem: str, report: RunReport) -> "RunRecord":
        return cls(
            problem=problem,
            solver=report.solver_name,
            status=report.status,
            n_f=report.counters.n_f,
            n_g=report.counters.n_g,
            iterations=report.iterations,
            wall_time=report.wall_time,
            final_residual=report.final_residual,
        )


@dataclass(frozen=True)
class ProfileCurve:
    """Distribution curve of one solver over the commonly solved problems."""

    solver: str
    points: Tuple[Tuple[float, float], ...]


def run_batch(
    problems: Sequence[ProblemDef],
    solvers: Sequence[str],
    config: Optional[SolverConfig] = None,
    jobs: int = 1,
) -> List[RunRecord]:
    """Run every (problem, solver) cell with fresh state.

    Individual failures become that record's status; the batch itself never
    aborts. Records come back in canonical (problem, solver) order and their
    contents are deterministic for a fixed config, apart from wall times.
    """
    if not problems or not solvers:
        raise ValueError("problem and solver selections must be nonempty")
    unknown = [s for s in solvers if s not in SOLVERS]
    if unknown:
        raise KeyError(f"unknown solvers: {unknown}")
    config = config or SolverConfig()
    cells = [(p, s) for p in problems for s in solvers]

    def run_cell(cell) -> RunRecord:
        problem, solver = cell
        try:
            report = SOLVERS[solver](problem.objective, problem.x0, config)
            return RunRecord.from_report(problem.name, report)
        except Exception:
            return RunRecord(
                problem=problem.name,
                solver=solver,
                status=Status.NUMERICAL_BREAKDOWN,
                n_f=0,
                n_g=0,
                iterations=0,
                wall_time=0.0,
                final_residual=float("inf"),
            )

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(run_cell, cells))
    else:
        records = [run_cell(cell) for cell in cells]
    records.sort(key=lambda r: (r.problem, r.solver))
    return records


def performance_profile(
    records: Sequence[RunRecord],
    metric: str = "n_f",
    tau_grid: Sequence[float] = DEFAULT_TAU_GRID,
    union: bool = False,
) -> List[ProfileCurve]:
    """Distribution curves F_s(tau) over the given tau grid.

    By default restricts to the problems solved by every solver present in
    the records relative to the per-problem best cost; ``union=True`` keeps
    problems solved by at least one solver instead, assigning failed runs an
    infinite cost. Raises :class:`EmptyIntersectionError` when no problem
    qualifies.
    """
    if metric not in ("n_f", "wall_time"):
        raise ValueError(f"unsupported metric: {metric!r}")
    if not tau_grid or any(t < 1.0 for t in tau_grid):
        raise ValueError("tau grid values must be >= 1")
    solvers = sorted({r.solver for r in records})
    by_problem: Dict[str, Dict[str, RunRecord]] = {}
    for record in records:
        cell = by_problem.setdefault(record.problem, {})
        if record.solver in cell:
            raise ValueError(f"duplicate record for ({record.problem}, {record.solver})")
        cell[record.solver] = record

    costs: Dict[str, Dict[str, float]] = {}
    for problem, cell in by_problem.items():
        solved = {
            s: r for s, r in cell.items() if r.status is Status.CONVERGED
        }
        if union:
            if not solved:
                continue
        else:
            if set(cell) != set(solvers) or len(solved) != len(solvers):
                continue
        costs[problem] = {
            s: (getattr(cell[s], metric) if s in solved else float("inf"))
            for s in solvers
        }
    if not costs:
        raise EmptyIntersectionError("no problem was solved by all selected solvers")

    taus = sorted(float(t) for t in tau_grid)
    best = {p: min(c.values()) for p, c in costs.items()}
    total = len(costs)
    curves = []
    for solver in solvers:
        points = []
        for tau in taus:
            hits = sum(
                1 for p in costs if costs[p].get(solver, float("inf")) <= tau * best[p]
            )
            points.append((tau, hits / total))
        curves.append(ProfileCurve(solver=solver, points=tuple(points)))
    return curves


def write_records(records: Iterable[RunRecord], path: Union[str, Path]) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(CSV_FIELDS)
        for r in records:
            writer.writerow([
                r.problem,
                r.solver,
                r.status.value,
                r.n_f,
                r.n_g,
                r.iterations,
                repr(r.wall_time),
                repr(r.final_residual),
            ])


def read_records(path: Union[str, Path]) -> List[RunRecord]:
    records = []
    with open(path, newline="") as handle:
        reader = csv.DictReader(handle)
        missing = set(CSV_FIELDS) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"records file is missing columns: {sorted(missing)}")
        for row in reader:
            records.append(RunRecord(
                problem=row["problem"],
                solver=row["solver"],
                status=Status(row["status"]),
                n_f=int(row["n_f"]),
                n_g=int(row["n_g"]),
                iterations=int(row["iterations"]),
                wall_time=float(row["wall_time"]),
                final_residual=float(row["final_residual"]),
            ))
    return records


def write_profile(curves: Iterable[ProfileCurve], path: Union[str, Path]) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["solver", "tau", "fraction"])
        for curve in curves:
            for tau, fraction in curve.points:
                writer.writerow([curve.solver, repr(tau), repr(fraction)])
