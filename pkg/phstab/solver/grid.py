from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .._settings import CLOSURES, MIN_CELLS

SUMMATION_BY_PARTS = "summation_by_parts"
ONE_SIDED = "one_sided"


@dataclass(frozen=True)
class Grid:
    """Uniform nodes a + i h, i = 0..N."""

    N: int
    interval: Tuple[float, float]

    def __post_init__(self):
        if int(self.N) != self.N or self.N < MIN_CELLS:
            raise ValueError("grid needs at least %d cells, got %s" % (MIN_CELLS, self.N))
        if not self.interval[0] < self.interval[1]:
            raise ValueError("interval must satisfy a < b, got %s" % (self.interval,))

    @property
    def h(self) -> float:
        return (self.interval[1] - self.interval[0]) / self.N

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.interval[0], self.interval[1], self.N + 1)

    @property
    def weights(self) -> np.ndarray:
        """Trapezoid weights."""
        weights = np.full(self.N + 1, self.h)
        weights[0] = weights[-1] = 0.5 * self.h
        return weights


def grid_for_state(state, interval) -> Grid:
    return Grid(len(state) - 1, interval)


def difference(y: np.ndarray, h: float, closure: str = ONE_SIDED) -> np.ndarray:
    """d/dzeta along axis 0: central differences inside, ``closure`` at the two ends.

    The default one-sided closure uses second order end stencils. The summation
    by parts closure uses first order end rows so that, with
    trapezoid weights W, W D + (W D)^T = diag(-1, 0, ..., 0, 1).
    """
    if closure not in CLOSURES:
        raise ValueError("Invalid closure %s, must be one of %s" % (closure, CLOSURES))
    dy = np.empty_like(y)
    dy[1:-1] = (y[2:] - y[:-2]) / (2.0 * h)
    if closure == SUMMATION_BY_PARTS:
        dy[0] = (y[1] - y[0]) / h
        dy[-1] = (y[-1] - y[-2]) / h
    else:
        dy[0] = (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * h)
        dy[-1] = (3.0 * y[-1] - 4.0 * y[-2] + y[-3]) / (2.0 * h)
    return dy
