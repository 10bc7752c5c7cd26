"""Search-direction computation via the regularized two-loop recursion.

The fast path never forms a matrix: it runs the standard two-loop recursion
over the stored pair window with the per-pair shifted curvature and a scaled,
regularized initial diagonal. A dense brute-force construction of the
approximate Hessian is provided as a test oracle for small dimensions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import NumericalBreakdownError, Vector
from .curvature import CurvaturePair, PairHistory, shifted_curvature

_ORACLE_MAX_DIM = 64


@dataclass(frozen=True)
class ScalingState:
    """Inverse curvature scale of the initial matrix; always positive."""

    gamma: float

    def __post_init__(self):
        if not self.gamma > 0.0:
            raise ValueError("gamma must be positive")


def gamma_scale(last_pair: Optional[CurvaturePair], alpha_floor: float) -> ScalingState:
    """Scale for the initial matrix from the most recent curvature pair.

    Uses ``s'y / ||y||^2`` when the pair has enough positive curvature and
    falls back to ``alpha_floor * ||s||^2 / ||y||^2`` otherwise, so the
    result is strictly positive. With no pair yet the scale is 1.
    """
    if alpha_floor <= 0.0:
        raise ValueError("alpha_floor must be positive")
    if last_pair is None:
        return ScalingState(1.0)
    if last_pair.yy == 0.0:
        raise NumericalBreakdownError("curvature pair has zero gradient difference")
    if last_pair.sy >= alpha_floor * last_pair.ss:
        return ScalingState(last_pair.sy / last_pair.yy)
    return ScalingState(alpha_floor * last_pair.ss / last_pair.yy)


def initial_diag(gamma: float, mu: float) -> float:
    """Diagonal of the regularized initial inverse matrix: gamma/(1+gamma*mu).

    Lies in (0, gamma] and decreases strictly in ``mu``.
    """
    if gamma <= 0.0:
        raise ValueError("gamma must be positive")
    if mu < 0.0:
        raise ValueError("mu must be nonnegative")
    return gamma / (1.0 + gamma * mu)


def two_loop_direction(
    history: PairHistory,
    gradient: Vector,
    mu: float,
    scaling: ScalingState,
) -> Vector:
    """Quasi-Newton direction ``-H(mu) @ gradient`` in O(m*n) time.

    ``H(mu)`` is the limited-memory inverse built from the initial diagonal
    and the stored pairs with their shifted curvature, applied oldest to
    newest. With an empty history this reduces to a scaled steepest-descent
    step. The result is a descent direction whenever the gradient is nonzero.
    """
    g = np.asarray(gradient, dtype=float)
    pairs = list(history)
    q = g.copy()
    alphas = [0.0] * len(pairs)
    shifted = [None] * len(pairs)
    for i in range(len(pairs) - 1, -1, -1):
        pair = pairs[i]
        y_shifted, s_ty = shifted_curvature(pair, mu)
        tau = 1.0 / s_ty if s_ty != 0.0 else math.inf
        if not math.isfinite(tau):
            raise NumericalBreakdownError(f"non-finite curvature weight 1/{s_ty!r}")
        a = tau * float(pair.s @ q)
        q -= a * y_shifted
        alphas[i] = a
        shifted[i] = (y_shifted, tau)
    r = initial_diag(scaling.gamma, mu) * q
    for i in range(len(pairs)):
        y_shifted, tau = shifted[i]
        beta = tau * float(y_shifted @ r)
        r += (alphas[i] - beta) * pairs[i].s
    return -r


def dense_bfgs_oracle(
    history: PairHistory,
    mu: float,
    scaling: ScalingState,
    n: int,
) -> Vector:
    """Explicit n-by-n regularized approximate Hessian, for testing only.

    Applies the direct rank-two update with the shifted pairs oldest to
    newest, starting from the inverse of the initial diagonal. The product
    of this matrix with `two_loop_direction`'s output recovers the negated
    gradient.
    """
    if n > _ORACLE_MAX_DIM:
        raise ValueError(f"dense oracle limited to n <= {_ORACLE_MAX_DIM}")
    b = np.eye(n) / initial_diag(scaling.gamma, mu)
    for pair in history:
        y_shifted, s_ty = shifted_curvature(pair, mu)
        if s_ty <= 0.0:
            raise NumericalBreakdownError("nonpositive shifted curvature in update")
        bs = b @ pair.s
        sbs = float(pair.s @ bs)
        if sbs <= 0.0:
            raise NumericalBreakdownError("nonpositive quadratic form in update")
        b = b - np.outer(bs, bs) / sbs + np.outer(y_shifted, y_shifted) / s_ty
    return b
