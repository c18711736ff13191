"""Compound Simpson grids on ``[0, d]``.

The grid supplies both the sampling nodes of the transform data and the
weights of the discrete inner product used throughout the package.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["SimpsonGrid", "build_grid", "integrate_sampled"]


@dataclass(frozen=True)
class SimpsonGrid:
    """Uniform nodes ``p_j = j*h`` with compound Simpson weights.

    Attributes
    ----------
    m : int
        Even number of panels; the grid has ``m + 1`` nodes.
    d : float
        Right end of the interval.
    h : float
        Node spacing ``d / m``.
    nodes, weights : ndarray
        Read-only arrays of length ``m + 1``.
    """

    m: int
    d: float
    h: float
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def size(self) -> int:
        return self.m + 1


def build_grid(m: int, d: float) -> SimpsonGrid:
    """Build the compound Simpson grid with ``m`` panels on ``[0, d]``.

    Weights follow the ``h/3, 4h/3, 2h/3, ..., 4h/3, h/3`` pattern, so they
    sum to ``d`` for every even ``m``.

    Raises
    ------
    ValueError
        If ``m`` is not an even integer >= 2 or ``d`` is not positive.
    """
    if isinstance(m, bool) or int(m) != m or m < 2 or m % 2:
        raise ValueError(f"m must be an even integer >= 2, got {m!r}")
    if not d > 0:
        raise ValueError(f"d must be positive, got {d!r}")
    m = int(m)
    d = float(d)
    h = d / m
    # j*h rather than a running sum: no drift for large m
    nodes = np.arange(m + 1) * h
    nodes[-1] = d
    weights = np.full(m + 1, 2.0 * h / 3.0)
    weights[1::2] = 4.0 * h / 3.0
    weights[0] = weights[-1] = h / 3.0
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return SimpsonGrid(m=m, d=d, h=h, nodes=nodes, weights=weights)


def integrate_sampled(grid: SimpsonGrid, values) -> float:
    """Apply the grid's weights to samples taken at its nodes."""
    values = np.asarray(values, dtype=float)
    if values.shape != (grid.size,):
        raise ValueError(
            f"expected {grid.size} samples, got shape {values.shape}")
    return float(np.dot(grid.weights, values))
