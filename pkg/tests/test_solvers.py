import math

import numpy as np
import pytest

from regulus.core import (
    EvalBudgetExceededError,
    EvalCounter,
    Objective,
    RegularizationOverflowError,
    SolverConfig,
    Status,
)
from regulus.curvature import PairHistory, shifted_curvature
from regulus.direction import ScalingState
from regulus.problems import get_problem
from regulus.solvers import (
    IterateState,
    accept_step_rlbfgs,
    solve_lbfgs,
    solve_rlbfgs,
    solve_rlbfgs_sw,
    update_mu,
    wolfe_extension_step,
)
from regulus.step_control import FWindow

from conftest import CountingObjective, quadratic_objective


def fresh_state(objective, x0, config):
    counters = EvalCounter()
    x = np.asarray(x0, dtype=float)
    f = objective.value(x)
    counters.n_f += 1
    g = objective.gradient(x)
    counters.n_g += 1
    window = FWindow(config.M)
    window.push(f)
    state = IterateState(
        x=x, f=f, g=np.asarray(g, float), mu=config.mu0,
        history=PairHistory(config.m), scaling=ScalingState(1.0), fwindow=window,
    )
    return state, counters


# --- update_mu -------------------------------------------------------------

def test_update_mu_keeps_on_ordinary_success():
    assert update_mu(2.0, 0.5, SolverConfig()) == 2.0


def test_update_mu_shrinks_on_strong_success():
    assert update_mu(2.0, 0.95, SolverConfig()) == pytest.approx(0.2)


def test_update_mu_floors_at_minimum():
    assert update_mu(0.005, 0.95, SolverConfig()) == 1e-3


def test_update_mu_requires_accepted_ratio():
    with pytest.raises(ValueError):
        update_mu(1.0, 0.001, SolverConfig())


# --- accept_step -----------------------------------------------------------

def test_accept_step_exact_quadratic_accepts_first_trial():
    # the first-iteration model Hessian is (1/gamma + mu0) I = 2 I; a
    # quadratic with exactly that curvature gives ratio 1 and no escalation
    objective = quadratic_objective(2.0 * np.ones(2))
    config = SolverConfig()
    state, counters = fresh_state(objective, [3.0, 4.0], config)
    step = accept_step_rlbfgs(state, config, objective, counters)
    assert step.inner_iters == 0
    assert step.mu_used == config.mu0
    assert step.ratio == pytest.approx(1.0)


def test_accept_step_two_trial_script():
    # first trial engineered to land at ratio 0.005, second at ~0.5
    table = {0.0: 1.0, -0.5: 1.0 - 0.00125, -1.0 / 11.0: 1.0 - 1.0 / 44.0}

    def value(x):
        return table[float(x[0])]

    objective = Objective(dim=1, value=value, gradient=lambda x: np.array([1.0]))
    config = SolverConfig()
    state, counters = fresh_state(objective, [0.0], config)
    step = accept_step_rlbfgs(state, config, objective, counters)
    assert step.inner_iters == 1
    assert step.mu_used == 10.0
    assert step.f_trial == 1.0 - 1.0 / 44.0
    assert step.ratio == pytest.approx(0.5)
    assert counters.n_f == 3  # initial + two trials


def test_accept_step_overflow_on_hostile_objective():
    def value(x):
        if abs(float(x[0])) > 1e-30:
            return math.inf
        return 1.0

    objective = Objective(dim=1, value=value, gradient=lambda x: np.array([1.0]))
    config = SolverConfig()
    state, counters = fresh_state(objective, [0.0], config)
    with pytest.raises(RegularizationOverflowError):
        accept_step_rlbfgs(state, config, objective, counters)


def test_accept_step_budget_exhaustion_mid_loop():
    def value(x):
        return 1.0 if float(x[0]) == 0.0 else 2.0  # every trial is worse

    objective = Objective(dim=1, value=value, gradient=lambda x: np.array([1.0]))
    config = SolverConfig(max_fevals=3)
    state, counters = fresh_state(objective, [0.0], config)
    with pytest.raises(EvalBudgetExceededError):
        accept_step_rlbfgs(state, config, objective, counters)
    assert counters.n_f == 4


# --- the Wolfe step extension ----------------------------------------------

def test_extension_trigger_requires_mu_at_floor():
    objective = quadratic_objective(np.ones(1))
    config = SolverConfig()
    counters = EvalCounter()
    x_unit = np.array([9.901])
    d = np.array([-0.099])
    result = wolfe_extension_step(
        objective, counters, config, x_unit, d,
        f_unit=objective.value(x_unit), g_unit=np.array([9.901]),
        g_prev=np.array([10.0]), mu_used=1.0,
    )
    assert not result.fired
    assert result.alpha is None
    np.testing.assert_array_equal(result.x, x_unit)
    assert counters.n_f == 0 and counters.n_g == 0


def test_extension_scripted_short_step():
    # scripted state on f = x^2/2: a short accepted step leaves a steep
    # slope, the curvature trigger fires, and the Wolfe search extends it
    objective = quadratic_objective(np.ones(1))
    config = SolverConfig()
    counters = EvalCounter()
    x = np.array([10.0])
    d = np.array([-0.099])
    x_unit = x + d
    f_unit = objective.value(x_unit)
    g_unit = objective.gradient(x_unit)
    result = wolfe_extension_step(
        objective, counters, config, x_unit, d,
        f_unit=f_unit, g_unit=g_unit, g_prev=objective.gradient(x),
        mu_used=config.mu_min,
    )
    assert result.fired and not result.ls_failed
    assert result.alpha is not None and result.alpha >= 1.0
    assert result.f < f_unit
    np.testing.assert_allclose(result.x, x_unit + result.alpha * d)
    np.testing.assert_allclose(result.s, (1.0 + result.alpha) * d)
    # the step satisfies both Wolfe conditions measured from the unit point
    dphi0 = float(d @ g_unit)
    assert result.f <= f_unit + config.c1 * result.alpha * dphi0
    assert abs(float(d @ result.g)) <= config.c2 * abs(dphi0)


def test_extension_failure_falls_back_to_unit_step():
    # a curvature condition that can never be met: linear descent profile
    objective = Objective(
        dim=1, value=lambda x: -float(x[0]), gradient=lambda x: np.array([-1.0])
    )
    config = SolverConfig()
    counters = EvalCounter()
    x_unit = np.array([1.0])
    d = np.array([1.0])
    result = wolfe_extension_step(
        objective, counters, config, x_unit, d,
        f_unit=-1.0, g_unit=np.array([-1.0]), g_prev=np.array([-1.0]),
        mu_used=config.mu_min,
    )
    assert result.fired and result.ls_failed
    assert result.alpha is None
    np.testing.assert_array_equal(result.x, x_unit)
    np.testing.assert_array_equal(result.s, d)


# --- full runs --------------------------------------------------------------

@pytest.mark.parametrize("solve", [solve_lbfgs, solve_rlbfgs, solve_rlbfgs_sw])
def test_immediate_convergence_at_stationary_start(solve):
    objective = quadratic_objective(np.ones(2))
    report = solve(objective, np.zeros(2))
    assert report.status is Status.CONVERGED
    assert report.iterations == 0
    assert report.counters.n_f == 1
    assert report.counters.n_g == 1


def test_lbfgs_quadratic_single_iteration():
    objective = quadratic_objective(np.ones(3))
    report = solve_lbfgs(objective, np.array([1.0, -2.0, 2.0]))
    assert report.status is Status.CONVERGED
    assert report.iterations == 1
    np.testing.assert_allclose(report.x, np.zeros(3), atol=1e-12)


def test_rlbfgs_rosenbrock_converges():
    problem = get_problem("rosenbrock:2")
    trace = []
    report = solve_rlbfgs(problem.objective, problem.x0, trace=trace)
    assert report.status is Status.CONVERGED
    assert report.counters.n_f <= 10000
    assert report.final_residual < 1e-5
    np.testing.assert_allclose(report.x, np.ones(2), atol=1e-4)
    # every accepted step cleared the ratio threshold with mu at or above
    # the floor, and mu escalations were charged to inner_iterations
    config = SolverConfig()
    assert all(t.ratio >= config.eta1 for t in trace)
    assert all(t.mu >= config.mu_min for t in trace)
    assert report.inner_iterations >= 0
    assert len(trace) == report.iterations


def test_rlbfgs_large_quadratic():
    objective = quadratic_objective(np.arange(1.0, 101.0))
    report = solve_rlbfgs(objective, np.ones(100))
    assert report.status is Status.CONVERGED
    assert report.final_residual < 1e-5


def test_counter_exactness_against_wrapper():
    problem = get_problem("rosenbrock:2")
    for solve in (solve_lbfgs, solve_rlbfgs, solve_rlbfgs_sw):
        counting = CountingObjective(problem.objective)
        report = solve(counting.objective, problem.x0)
        assert report.counters.n_f == counting.value_calls
        assert report.counters.n_g == counting.grad_calls


def test_rlbfgs_monotone_when_window_disabled():
    problem = get_problem("rosenbrock:2")
    trace = []
    report = solve_rlbfgs(problem.objective, problem.x0, SolverConfig(M=0), trace=trace)
    assert report.status is Status.CONVERGED
    values = [problem.objective.value(problem.x0)] + [t.f for t in trace]
    assert all(b < a for a, b in zip(values, values[1:]))


def test_rlbfgs_sw_trigger_disabled_is_identical():
    problem = get_problem("rosenbrock:2")
    base = solve_rlbfgs(problem.objective, problem.x0)
    twin = solve_rlbfgs_sw(problem.objective, problem.x0, use_wolfe_trigger=False)
    assert np.array_equal(base.x, twin.x)
    assert base.final_f == twin.final_f
    assert base.counters.n_f == twin.counters.n_f
    assert base.counters.n_g == twin.counters.n_g
    assert base.iterations == twin.iterations


def test_rlbfgs_sw_extension_only_at_mu_floor():
    problem = get_problem("rosenbrock:2")
    trace = []
    solve_rlbfgs_sw(problem.objective, problem.x0, trace=trace)
    config = SolverConfig()
    for record in trace:
        if record.alpha is not None or record.ls_failed:
            assert record.mu == config.mu_min


def test_budget_exceeded_status():
    problem = get_problem("rosenbrock:2")
    report = solve_rlbfgs(problem.objective, problem.x0, SolverConfig(max_fevals=5))
    assert report.status is Status.EVAL_BUDGET_EXCEEDED
    assert report.counters.n_f > 5


def test_regularization_overflow_status():
    def value(x):
        return 1.0 if abs(float(x[0])) < 1e-30 else math.inf

    objective = Objective(dim=1, value=value, gradient=lambda x: np.array([1.0]))
    report = solve_rlbfgs(objective, np.zeros(1))
    assert report.status is Status.REGULARIZATION_OVERFLOW


def test_line_search_failure_status():
    # unbounded below with constant slope: no Wolfe step exists
    objective = Objective(
        dim=1, value=lambda x: -float(x[0]), gradient=lambda x: -np.ones(1)
    )
    report = solve_lbfgs(objective, np.zeros(1))
    assert report.status is Status.LINE_SEARCH_FAILURE


def test_numerical_breakdown_at_start():
    objective = Objective(
        dim=1, value=lambda x: math.nan, gradient=lambda x: np.ones(1)
    )
    report = solve_rlbfgs(objective, np.zeros(1))
    assert report.status is Status.NUMERICAL_BREAKDOWN
    assert math.isnan(report.final_f)


def test_pushed_pairs_keep_positive_shifted_curvature(monkeypatch):
    import regulus.solvers as solvers_mod

    pushed = []

    class RecordingHistory(PairHistory):
        def push(self, s, y):
            ok = super().push(s, y)
            if ok:
                pushed.append(self.newest)
            return ok

    monkeypatch.setattr(solvers_mod, "PairHistory", RecordingHistory)
    problem = get_problem("two-well:100")
    config = SolverConfig()
    report = solve_rlbfgs(problem.objective, problem.x0, config)
    assert report.status is Status.CONVERGED
    assert pushed
    for pair in pushed:
        _, s_ty = shifted_curvature(pair, config.mu_min)
        assert s_ty > 0.0


def test_trace_json_schema():
    problem = get_problem("rosenbrock:2")
    trace = []
    solve_rlbfgs_sw(problem.objective, problem.x0, trace=trace)
    import json

    for record in trace:
        data = json.loads(record.to_json())
        assert set(data) >= {"k", "mu", "ratio", "gnorm", "alpha", "nf"}
