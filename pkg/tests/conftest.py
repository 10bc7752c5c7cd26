import numpy as np
import pytest

from regulus.core import Objective
from regulus.curvature import PairHistory


class CountingObjective:
    """Wraps an Objective and counts raw calls, independent of EvalCounter."""

    def __init__(self, inner: Objective):
        self.value_calls = 0
        self.grad_calls = 0
        self._inner = inner
        self.objective = Objective(
            dim=inner.dim, value=self._value, gradient=self._gradient
        )

    def _value(self, x):
        self.value_calls += 1
        return self._inner.value(x)

    def _gradient(self, x):
        self.grad_calls += 1
        return self._inner.gradient(x)


def quadratic_objective(diag):
    """Convex diagonal quadratic 0.5 * sum(diag * x^2) as an Objective."""
    diag = np.asarray(diag, dtype=float)
    return Objective(
        dim=diag.size,
        value=lambda x: float(0.5 * np.sum(diag * x * x)),
        gradient=lambda x: diag * x,
    )


def random_history(rng, n, npairs, capacity=None, min_cos=0.1):
    """History of well-scaled random pairs with positive curvature.

    ``min_cos`` bounds the angle between s and y away from orthogonality so
    the implied updates stay numerically benign.
    """
    hist = PairHistory(capacity or max(npairs, 1))
    for _ in range(npairs):
        while True:
            s = rng.standard_normal(n)
            y = rng.standard_normal(n) * rng.uniform(0.1, 10.0)
            if s @ y > min_cos * np.linalg.norm(s) * np.linalg.norm(y):
                break
        hist.push(s, y)
    return hist


def gradient_check_error(problem, x):
    """Worst finite-difference deviation scaled by the gradient magnitude."""
    from regulus.problems import finite_difference_gradient

    g = problem.objective.gradient(x)
    h = 1e-6 * np.maximum(1.0, np.abs(x))
    fd = finite_difference_gradient(problem.objective, x, h)
    return np.max(np.abs(fd - g)) / max(1.0, np.max(np.abs(g)))


def mixed_sign_pair(rng, n):
    """Random (s, y) with either sign of s'y, s nonzero."""
    while True:
        s = rng.standard_normal(n)
        if s @ s > 0:
            break
    y = rng.standard_normal(n) * rng.uniform(0.1, 10.0)
    return s, y


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
