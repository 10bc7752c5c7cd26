"""Regularized limited-memory BFGS solvers with a benchmarking harness."""

from .core import (
    EvalCounter,
    Objective,
    RunReport,
    SolverConfig,
    Status,
    check_termination,
    evaluate,
)
from .harness import (
    EmptyIntersectionError,
    ProfileCurve,
    RunRecord,
    performance_profile,
    run_batch,
)
from .problems import ProblemDef, get_problem, make_problem, registry
from .solvers import SOLVERS, TraceRecord, solve_lbfgs, solve_rlbfgs, solve_rlbfgs_sw

__version__ = "0.1.0"

__all__ = [
    "EvalCounter",
    "Objective",
    "RunReport",
    "SolverConfig",
    "Status",
    "check_termination",
    "evaluate",
    "EmptyIntersectionError",
    "ProfileCurve",
    "RunRecord",
    "performance_profile",
    "run_batch",
    "ProblemDef",
    "get_problem",
    "make_problem",
    "registry",
    "SOLVERS",
    "TraceRecord",
    "solve_lbfgs",
    "solve_rlbfgs",
    "solve_rlbfgs_sw",
    "__version__",
]
