"""Iteration drivers: baseline L-BFGS with strong Wolfe search, the
regularized variant driven by a ratio test, and the regularized variant with
an opportunistic Wolfe step extension.

All three share the curvature store, two-loop direction, step control, and
line search; the baseline is exactly the regularized direction code at
``mu = 0``, so comparisons isolate the regularization itself.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass
from typing import Callable, Dict, List, NamedTuple, Optional

import numpy as np

from .core import (
    EvalBudgetExceededError,
    EvalCounter,
    LineSearchError,
    NonpositiveModelReductionError,
    NumericalBreakdownError,
    Objective,
    RegularizationOverflowError,
    RunReport,
    SolverConfig,
    Status,
    Vector,
    check_termination,
    evaluate,
    scaled_gradient_norm,
)
from .curvature import PairHistory
from .direction import ScalingState, gamma_scale, two_loop_direction
from .linesearch import LineProbe, strong_wolfe_search
from .step_control import FWindow, acceptance_ratio, model_reduction, nonmonotone_reference


@dataclass
class IterateState:
    """Mutable per-run state owned by a single solver loop."""

    x: Vector
    f: float
    g: Vector
    mu: float
    history: PairHistory
    scaling: ScalingState
    fwindow: FWindow
    k: int = 0


@dataclass
class TraceRecord:
    """One per-iteration trace entry.

    The serialized form carries the stable keys ``k, mu, ratio, gnorm,
    alpha, nf``; the extra in-memory fields exist for tests and diagnostics.
    ``alpha`` is None for iterations without a line search.
    """

    k: int
    mu: float
    ratio: Optional[float]
    gnorm: float
    alpha: Optional[float]
    nf: int
    f: float = math.nan
    f_unit: float = math.nan
    ls_failed: bool = False

    def to_json(self) -> str:
        record = {
            "k": self.k,
            "mu": self.mu,
            "ratio": self.ratio,
            "gnorm": self.gnorm,
            "alpha": self.alpha,
            "nf": self.nf,
        }
        if self.ls_failed:
            record["ls_failed"] = True
        return json.dumps(record)


class AcceptedStep(NamedTuple):
    d: Vector
    mu_used: float
    f_trial: float
    inner_iters: int
    ratio: float
    model_red: float


def accept_step_rlbfgs(
    state: IterateState,
    config: SolverConfig,
    objective: Objective,
    counters: EvalCounter,
) -> AcceptedStep:
    """Inner loop of the regularized solvers.

    Starting from the current regularization parameter, repeatedly computes
    the direction, evaluates the trial point, and either accepts (ratio at
    least ``eta1`` against the nonmonotone reference) or escalates the
    parameter by ``gamma2`` and retries. Non-finite trial values count as
    rejections. Raises :class:`RegularizationOverflowError` past ``mu_max``
    and :class:`EvalBudgetExceededError` when a rejected trial exhausts the
    evaluation budget.
    """
    f_ref = nonmonotone_reference(state.fwindow, state.k, config.M)
    mu_bar = state.mu
    inner = 0
    while True:
        d = two_loop_direction(state.history, state.g, mu_bar, state.scaling)
        reduction = model_reduction(state.g, d)
        try:
            f_trial = evaluate(objective, state.x + d, counters, "value")
        except NumericalBreakdownError:
            f_trial = math.inf
        if math.isfinite(f_trial):
            ratio = acceptance_ratio(f_ref, f_trial, reduction)
            if ratio >= config.eta1:
                return AcceptedStep(d, mu_bar, f_trial, inner, ratio, reduction)
        if counters.n_f > config.max_fevals:
            raise EvalBudgetExceededError(
                f"evaluation budget exhausted after {counters.n_f} evaluations"
            )
        mu_bar *= config.gamma2
        inner += 1
        if mu_bar > config.mu_max:
            raise RegularizationOverflowError(f"mu escalated past {config.mu_max:g}")


def update_mu(mu_used: float, ratio: float, config: SolverConfig) -> float:
    """Regularization parameter for the next outer iteration.

    An ordinary acceptance keeps the parameter; a very successful one
    (ratio at least ``eta2``) shrinks it by ``gamma1``, floored at
    ``mu_min``.
    """
    if ratio < config.eta1:
        raise ValueError("update_mu requires an accepted step (ratio >= eta1)")
    if ratio >= config.eta2:
        return max(config.mu_min, config.gamma1 * mu_used)
    return mu_used


class ExtensionResult(NamedTuple):
    x: Vector
    f: float
    g: Vector
    s: Vector
    alpha: Optional[float]
    fired: bool
    ls_failed: bool


def wolfe_extension_step(
    objective: Objective,
    counters: EvalCounter,
    config: SolverConfig,
    x_unit: Vector,
    d: Vector,
    f_unit: float,
    g_unit: Vector,
    g_prev: Vector,
    mu_used: float,
) -> ExtensionResult:
    """Opportunistic step extension after an accepted regularized step.

    Fires only when the unit step left a steep slope (the curvature
    condition fails at the trial point) while the regularization already sat
    at its floor, i.e. the step could not have been any longer. A strong
    Wolfe search then continues from the trial point along the same
    direction and the iterate moves by ``(1 + alpha) * d``. A failed search
    falls back to the already-accepted unit step and the run continues.
    """
    d_dot_unit = float(d @ g_unit)
    d_dot_prev = float(d @ g_prev)
    if not (d_dot_unit < config.c2 * d_dot_prev and mu_used == config.mu_min):
        return ExtensionResult(x_unit, f_unit, g_unit, d, None, False, False)

    stash: Dict[str, object] = {}

    def along(alpha: float):
        x_t = x_unit + alpha * d
        try:
            f_t, g_t = evaluate(objective, x_t, counters, "both")
        except NumericalBreakdownError:
            # An exploding probe just fails sufficient decrease.
            return math.inf, 0.0
        stash["alpha"] = alpha
        stash["g"] = g_t
        return f_t, float(d @ g_t)

    probe = LineProbe(phi0=f_unit, dphi0=d_dot_unit, evaluator=along)
    try:
        alpha, phi_alpha, _ = strong_wolfe_search(
            probe, config.c1, config.c2, 1.0, config.max_ls_iters
        )
    except LineSearchError:
        return ExtensionResult(x_unit, f_unit, g_unit, d, None, True, True)
    x_new = x_unit + alpha * d
    if stash.get("alpha") == alpha:
        g_new = stash["g"]
    else:
        g_new = evaluate(objective, x_new, counters, "gradient")
    return ExtensionResult(x_new, phi_alpha, g_new, (1.0 + alpha) * d, alpha, True, False)


def _initial_state(objective, x0, config, counters) -> IterateState:
    x = np.array(x0, dtype=float)
    if x.ndim != 1 or x.size != objective.dim:
        raise ValueError(f"x0 must be a vector of length {objective.dim}")
    if not np.all(np.isfinite(x)):
        raise ValueError("x0 must be finite")
    f = evaluate(objective, x, counters, "value")
    g = evaluate(objective, x, counters, "gradient")
    fwindow = FWindow(config.M)
    fwindow.push(f)
    return IterateState(
        x=x,
        f=f,
        g=g,
        mu=config.mu0,
        history=PairHistory(config.m),
        scaling=ScalingState(1.0),
        fwindow=fwindow,
    )


def _report(status, state, counters, t0, solver_name, inner_total) -> RunReport:
    if state is None:
        return RunReport(
            status=status,
            iterations=0,
            inner_iterations=0,
            counters=counters,
            final_f=math.nan,
            final_residual=math.inf,
            wall_time=time.perf_counter() - t0,
            solver_name=solver_name,
        )
    return RunReport(
        status=status,
        iterations=state.k,
        inner_iterations=inner_total,
        counters=counters,
        final_f=state.f,
        final_residual=scaled_gradient_norm(state.g, state.x),
        wall_time=time.perf_counter() - t0,
        solver_name=solver_name,
        x=state.x,
    )


def _run_regularized(
    objective: Objective,
    x0: Vector,
    config: SolverConfig,
    trace: Optional[List[TraceRecord]],
    solver_name: str,
    wolfe_extension: bool,
) -> RunReport:
    counters = EvalCounter()
    t0 = time.perf_counter()
    try:
        state = _initial_state(objective, x0, config, counters)
    except NumericalBreakdownError:
        return _report(Status.NUMERICAL_BREAKDOWN, None, counters, t0, solver_name, 0)
    inner_total = 0
    while True:
        try:
            decision = check_termination(state.g, state.x, counters, config)
        except NumericalBreakdownError:
            return _report(Status.NUMERICAL_BREAKDOWN, state, counters, t0, solver_name, inner_total)
        if decision is not None:
            return _report(decision, state, counters, t0, solver_name, inner_total)

        try:
            step = accept_step_rlbfgs(state, config, objective, counters)
        except EvalBudgetExceededError:
            return _report(Status.EVAL_BUDGET_EXCEEDED, state, counters, t0, solver_name, inner_total)
        except RegularizationOverflowError:
            return _report(Status.REGULARIZATION_OVERFLOW, state, counters, t0, solver_name, inner_total)
        except (NumericalBreakdownError, NonpositiveModelReductionError):
            return _report(Status.NUMERICAL_BREAKDOWN, state, counters, t0, solver_name, inner_total)
        inner_total += step.inner_iters
        mu_next = update_mu(step.mu_used, step.ratio, config)

        x_unit = state.x + step.d
        try:
            # One gradient evaluation per accepted step; it serves the
            # extension trigger, the new curvature pair, and the next
            # iteration alike.
            g_unit = evaluate(objective, x_unit, counters, "gradient")
        except NumericalBreakdownError:
            return _report(Status.NUMERICAL_BREAKDOWN, state, counters, t0, solver_name, inner_total)

        if wolfe_extension:
            try:
                ext = wolfe_extension_step(
                    objective, counters, config, x_unit, step.d,
                    step.f_trial, g_unit, state.g, step.mu_used,
                )
            except NumericalBreakdownError:
                return _report(Status.NUMERICAL_BREAKDOWN, state, counters, t0, solver_name, inner_total)
        else:
            ext = ExtensionResult(x_unit, step.f_trial, g_unit, step.d, None, False, False)

        state.history.push(ext.s, ext.g - state.g)
        state.scaling = gamma_scale(state.history.newest, config.alpha_floor)
        state.fwindow.push(ext.f)
        if trace is not None:
            trace.append(TraceRecord(
                k=state.k,
                mu=step.mu_used,
                ratio=step.ratio,
                gnorm=float(np.linalg.norm(state.g)),
                alpha=ext.alpha,
                nf=counters.n_f,
                f=ext.f,
                f_unit=step.f_trial,
                ls_failed=ext.ls_failed,
            ))
        state.x, state.f, state.g = ext.x, ext.f, ext.g
        state.mu = mu_next
        state.k += 1


def solve_rlbfgs(
    objective: Objective,
    x0: Vector,
    config: Optional[SolverConfig] = None,
    trace: Optional[List[TraceRecord]] = None,
) -> RunReport:
    """Regularized L-BFGS: unit steps accepted by the ratio test, with the
    regularization parameter controlled like a trust-region radius."""
    return _run_regularized(objective, x0, config or SolverConfig(), trace, "rlbfgs", False)


def solve_rlbfgs_sw(
    objective: Objective,
    x0: Vector,
    config: Optional[SolverConfig] = None,
    trace: Optional[List[TraceRecord]] = None,
    use_wolfe_trigger: bool = True,
) -> RunReport:
    """Regularized L-BFGS that extends accepted steps by a strong Wolfe
    search when the unit step is detectably short.

    ``use_wolfe_trigger=False`` disables the extension entirely, reproducing
    `solve_rlbfgs` exactly; it exists for A/B comparisons.
    """
    return _run_regularized(
        objective, x0, config or SolverConfig(), trace, "rlbfgs-sw", use_wolfe_trigger
    )


def solve_lbfgs(
    objective: Objective,
    x0: Vector,
    config: Optional[SolverConfig] = None,
    trace: Optional[List[TraceRecord]] = None,
) -> RunReport:
    """Baseline limited-memory BFGS with a strong Wolfe line search.

    Uses the shared direction code at ``mu = 0`` and unit initial step
    length; a failed line search terminates the run with that status.
    """
    config = config or SolverConfig()
    counters = EvalCounter()
    t0 = time.perf_counter()
    name = "lbfgs"
    try:
        state = _initial_state(objective, x0, config, counters)
    except NumericalBreakdownError:
        return _report(Status.NUMERICAL_BREAKDOWN, None, counters, t0, name, 0)
    while True:
        try:
            decision = check_termination(state.g, state.x, counters, config)
        except NumericalBreakdownError:
            return _report(Status.NUMERICAL_BREAKDOWN, state, counters, t0, name, 0)
        if decision is not None:
            return _report(decision, state, counters, t0, name, 0)

        try:
            d = two_loop_direction(state.history, state.g, 0.0, state.scaling)
        except NumericalBreakdownError:
            return _report(Status.NUMERICAL_BREAKDOWN, state, counters, t0, name, 0)
        dphi0 = float(d @ state.g)
        if not dphi0 < 0.0:
            return _report(Status.NUMERICAL_BREAKDOWN, state, counters, t0, name, 0)

        stash: Dict[str, object] = {}

        def along(alpha, _x=state.x, _d=d):
            x_t = _x + alpha * _d
            try:
                f_t, g_t = evaluate(objective, x_t, counters, "both")
            except NumericalBreakdownError:
                return math.inf, 0.0
            stash["alpha"] = alpha
            stash["g"] = g_t
            return f_t, float(_d @ g_t)

        probe = LineProbe(phi0=state.f, dphi0=dphi0, evaluator=along)
        try:
            alpha, phi_alpha, _ = strong_wolfe_search(
                probe, config.c1, config.c2, 1.0, config.max_ls_iters
            )
        except LineSearchError:
            return _report(Status.LINE_SEARCH_FAILURE, state, counters, t0, name, 0)

        x_new = state.x + alpha * d
        if stash.get("alpha") == alpha:
            g_new = stash["g"]
        else:
            try:
                g_new = evaluate(objective, x_new, counters, "gradient")
            except NumericalBreakdownError:
                return _report(Status.NUMERICAL_BREAKDOWN, state, counters, t0, name, 0)
        state.history.push(alpha * d, g_new - state.g)
        state.scaling = gamma_scale(state.history.newest, config.alpha_floor)
        if trace is not None:
            trace.append(TraceRecord(
                k=state.k,
                mu=0.0,
                ratio=None,
                gnorm=float(np.linalg.norm(state.g)),
                alpha=alpha,
                nf=counters.n_f,
                f=phi_alpha,
                f_unit=phi_alpha,
            ))
        state.x, state.f, state.g = x_new, phi_alpha, g_new
        state.k += 1


SOLVERS: Dict[str, Callable[..., RunReport]] = {
    "lbfgs": solve_lbfgs,
    "rlbfgs": solve_rlbfgs,
    "rlbfgs-sw": solve_rlbfgs_sw,
}
