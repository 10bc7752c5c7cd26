"""Bounded history of (s, y) curvature pairs with on-demand shifted curvature.

The history stores raw displacement/gradient-difference pairs; the
regularization shift is applied on the fly, so varying the regularization
parameter never requires re-storing vectors.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterator, Optional, Tuple

import numpy as np

from .core import Vector


@dataclass(frozen=True)
class CurvaturePair:
    """One displacement/gradient-difference pair with cached inner products."""

    s: Vector
    y: Vector
    sy: float
    ss: float
    yy: float

    @classmethod
    def from_vectors(cls, s: Vector, y: Vector) -> "CurvaturePair":
        s = np.asarray(s, dtype=float)
        y = np.asarray(y, dtype=float)
        return cls(
            s=s,
            y=y,
            sy=float(s @ y),
            ss=float(s @ s),
            yy=float(y @ y),
        )


class PairHistory:
    """FIFO window of the most recent curvature pairs, newest last."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("history capacity must be positive")
        self._pairs: deque[CurvaturePair] = deque(maxlen=capacity)

    @property
    def capacity(self) -> int:
        return self._pairs.maxlen

    @property
    def newest(self) -> Optional[CurvaturePair]:
        return self._pairs[-1] if self._pairs else None

    def push(self, s: Vector, y: Vector) -> bool:
        """Append a pair, evicting the oldest when at capacity.

        Zero-displacement or non-finite pairs are dropped (returns False);
        the raw ``y`` is stored unshifted.
        """
        pair = CurvaturePair.from_vectors(s, y)
        if pair.ss == 0.0:
            return False
        if not (np.all(np.isfinite(pair.s)) and np.all(np.isfinite(pair.y))):
            return False
        self._pairs.append(pair)
        return True

    def __len__(self) -> int:
        return len(self._pairs)

    def __iter__(self) -> Iterator[CurvaturePair]:
        """Iterate oldest to newest."""
        return iter(self._pairs)


def shifted_curvature(pair: CurvaturePair, mu: float) -> Tuple[Vector, float]:
    """Shifted gradient difference and its inner product with the displacement.

    Returns ``(y + (max(0, -s'y/||s||^2) + mu) * s, max(0, s'y) + mu*||s||^2)``.
    When ``s'y >= 0`` this is the plain shift ``y + mu*s``; the correction
    term otherwise guarantees a positive inner product for any ``mu > 0``.
    """
    if mu < 0.0:
        raise ValueError("mu must be nonnegative")
    correction = max(0.0, -pair.sy / pair.ss)
    y_shifted = pair.y + (correction + mu) * pair.s
    s_ty = max(0.0, pair.sy) + mu * pair.ss
    return y_shifted, s_ty
