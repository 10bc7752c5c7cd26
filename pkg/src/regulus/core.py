"""Core numeric types shared by every solver.

Defines the objective interface with evaluation accounting, the solver
configuration (with its file format), run reports, and the termination rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from enum import Enum
from pathlib import Path
from typing import Callable, Literal, Mapping, Optional, Union

import numpy as np

Vector = np.ndarray


class Status(Enum):
    """Terminal outcome of a solver run."""

    CONVERGED = "Converged"
    EVAL_BUDGET_EXCEEDED = "EvalBudgetExceeded"
    REGULARIZATION_OVERFLOW = "RegularizationOverflow"
    LINE_SEARCH_FAILURE = "LineSearchFailure"
    NUMERICAL_BREAKDOWN = "NumericalBreakdown"


class SolverError(Exception):
    """Base class for failures a solver turns into a report status."""


class NumericalBreakdownError(SolverError):
    """A non-finite value appeared where a finite one is required."""


class EvalBudgetExceededError(SolverError):
    """The function-evaluation budget ran out mid-iteration."""


class RegularizationOverflowError(SolverError):
    """The regularization parameter escalated past its safeguard bound."""


class LineSearchError(SolverError):
    """No acceptable step length was found."""


class NonpositiveModelReductionError(SolverError):
    """The quadratic model predicted no reduction for a nonzero gradient."""


@dataclass
class EvalCounter:
    """Running totals of objective and gradient evaluations for one run.

    Counters only ever increase, exactly once per underlying evaluation.
    """

    n_f: int = 0
    n_g: int = 0


@dataclass(frozen=True)
class Objective:
    """Smooth objective with an analytic gradient.

    ``value`` and ``gradient`` must be deterministic for a given point and
    the gradient must return a vector of length ``dim``.
    """

    dim: int
    value: Callable[[Vector], float]
    gradient: Callable[[Vector], Vector]


# Fields holding integer parameters; everything else is a float.
_INT_FIELDS = frozenset({"m", "M", "max_fevals", "max_ls_iters"})


@dataclass(frozen=True)
class SolverConfig:
    """All tunable solver parameters with their default values.

    ``mu0``/``mu_min`` bound the regularization parameter, ``gamma1`` and
    ``gamma2`` shrink/grow it, ``eta1``/``eta2`` are the ratio-test
    thresholds, ``m`` is the curvature memory, ``M`` the nonmonotone window
    and ``c1``/``c2`` the Wolfe constants.
    """

    mu0: float = 1.0
    mu_min: float = 1e-3
    gamma1: float = 0.1
    gamma2: float = 10.0
    eta1: float = 0.01
    eta2: float = 0.9
    m: int = 5
    M: int = 10
    c1: float = 1e-4
    c2: float = 0.9
    grad_tol: float = 1e-5
    max_fevals: int = 10000
    mu_max: float = 1e15
    alpha_floor: float = 1e-8
    max_ls_iters: int = 20

    def __post_init__(self):
        if not 0.0 < self.mu_min <= self.mu0:
            raise ValueError("requires 0 < mu_min <= mu0")
        if not 0.0 < self.gamma1 <= 1.0 < self.gamma2:
            raise ValueError("requires 0 < gamma1 <= 1 < gamma2")
        if not 0.0 < self.eta1 < self.eta2 <= 1.0:
            raise ValueError("requires 0 < eta1 < eta2 <= 1")
        if self.m < 1:
            raise ValueError("memory m must be a positive integer")
        if self.M < 0:
            raise ValueError("nonmonotone window M must be nonnegative")
        if not 0.0 < self.c1 < self.c2 < 1.0:
            raise ValueError("requires 0 < c1 < c2 < 1")
        if self.grad_tol <= 0.0:
            raise ValueError("grad_tol must be positive")
        if self.max_fevals < 1:
            raise ValueError("max_fevals must be a positive integer")
        if self.mu_max < self.mu0:
            raise ValueError("mu_max must be at least mu0")
        if self.alpha_floor <= 0.0:
            raise ValueError("alpha_floor must be positive")
        if self.max_ls_iters < 1:
            raise ValueError("max_ls_iters must be a positive integer")

    @classmethod
    def from_mapping(cls, data: Mapping[str, Union[str, int, float]]) -> "SolverConfig":
        """Build a config from a flat mapping; unknown keys are rejected."""
        valid = {f.name for f in fields(cls)}
        kwargs = {}
        for key, raw in data.items():
            if key not in valid:
                raise ValueError(f"unknown config key: {key!r}")
            if key in _INT_FIELDS:
                value = float(raw)
                if value != int(value):
                    raise ValueError(f"config key {key!r} must be an integer")
                kwargs[key] = int(value)
            else:
                kwargs[key] = float(raw)
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "SolverConfig":
        """Parse a flat ``key = value`` config file (one entry per line).

        Blank lines and ``#`` comments are ignored; every key is optional.
        """
        data = {}
        for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep or not key.strip() or not value.strip():
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            data[key.strip()] = value.strip()
        return cls.from_mapping(data)


@dataclass
class RunReport:
    """Outcome of one solver run.

    ``x`` carries the final iterate for programmatic use; it is not part of
    the serialized report.
    """

    status: Status
    iterations: int
    inner_iterations: int
    counters: EvalCounter
    final_f: float
    final_residual: float
    wall_time: float
    solver_name: str
    x: Optional[Vector] = None

    def to_dict(self) -> dict:
        return {
            "status": self.status.value,
            "iterations": self.iterations,
            "inner_iterations": self.inner_iterations,
            "n_f": self.counters.n_f,
            "n_g": self.counters.n_g,
            "final_f": self.final_f,
            "final_residual": self.final_residual,
            "wall_time": self.wall_time,
            "solver_name": self.solver_name,
        }


def evaluate(
    fn: Objective,
    point: Vector,
    counters: EvalCounter,
    what: Literal["value", "gradient", "both"] = "value",
):
    """Evaluate ``fn`` at ``point`` and charge the evaluation to ``counters``.

    Increments ``n_f`` when a value is requested and ``n_g`` when a gradient
    is requested. Raises :class:`NumericalBreakdownError` on any non-finite
    result; results are otherwise forwarded unmodified.
    """
    if len(point) != fn.dim:
        raise ValueError(f"point has length {len(point)}, objective expects {fn.dim}")
    value = gradient = None
    if what in ("value", "both"):
        counters.n_f += 1
        value = float(fn.value(point))
        if not math.isfinite(value):
            raise NumericalBreakdownError(f"objective value is {value!r}")
    if what in ("gradient", "both"):
        counters.n_g += 1
        gradient = np.asarray(fn.gradient(point), dtype=float)
        if gradient.shape != (fn.dim,):
            raise ValueError(f"gradient has shape {gradient.shape}, expected ({fn.dim},)")
        if not np.all(np.isfinite(gradient)):
            raise NumericalBreakdownError("gradient contains non-finite entries")
    if what == "value":
        return value
    if what == "gradient":
        return gradient
    if what == "both":
        return value, gradient
    raise ValueError(f"unknown evaluation request: {what!r}")


def scaled_gradient_norm(gradient: Vector, point: Vector) -> float:
    """Gradient norm scaled by max(1, ||x||); inf when the gradient is bad."""
    g = np.asarray(gradient, dtype=float)
    if not np.all(np.isfinite(g)):
        return math.inf
    return float(np.linalg.norm(g)) / max(1.0, float(np.linalg.norm(point)))


def check_termination(
    gradient: Vector,
    point: Vector,
    counters: EvalCounter,
    config: SolverConfig,
) -> Optional[Status]:
    """Decide whether the outer iteration should stop.

    Returns ``Status.CONVERGED`` when the scaled gradient norm is below
    ``grad_tol``, ``Status.EVAL_BUDGET_EXCEEDED`` when ``n_f`` has passed
    ``max_fevals`` (checked after the convergence test, so a run that
    converges exactly at the budget still counts as a success), and ``None``
    to continue. Raises :class:`NumericalBreakdownError` for a non-finite
    gradient.
    """
    g = np.asarray(gradient, dtype=float)
    if len(g) != len(point):
        raise ValueError("gradient and point lengths differ")
    if not np.all(np.isfinite(g)):
        raise NumericalBreakdownError("gradient contains non-finite entries")
    if scaled_gradient_norm(g, point) < config.grad_tol:
        return Status.CONVERGED
    if counters.n_f > config.max_fevals:
        return Status.EVAL_BUDGET_EXCEEDED
    return None
