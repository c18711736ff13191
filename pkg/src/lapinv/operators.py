"""Discretized Laplace operators on a Simpson grid.

``H`` is the Gram matrix of the kernel functions ``exp(-p_j t)`` over
``[0, b]`` and ``D`` the diagonal of Simpson weights.  The matrix of the
discrete normal operator is ``Q = H D``; it is self-adjoint and positive
semidefinite in the weighted inner product ``<u, v>_W = sum w_j u_j v_j``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .quadrature import SimpsonGrid, build_grid

__all__ = [
    "KernelMatrix",
    "build_kernel",
    "kernel_integral",
    "wm_inner",
    "wm_norm",
    "apply_Q",
    "apply_adjoint",
    "apply_discrete_normal",
]

# below this value of b*s the three-term series is used
_SERIES_CUTOFF = 1e-6


def kernel_integral(s, b: float):
    """Evaluate ``(1 - exp(-b*s)) / s`` stably, with value ``b`` at ``s = 0``."""
    s = np.asarray(s, dtype=float)
    x = b * s
    small = np.abs(x) < _SERIES_CUTOFF
    safe = np.where(small, 1.0, s)
    out = np.where(
        small,
        b - b * b * s / 2.0 + b ** 3 * s * s / 6.0,
        -np.expm1(-b * safe) / safe,
    )
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class KernelMatrix:
    """Gram matrix ``H`` and weight diagonal for support bound ``b``."""

    grid: SimpsonGrid
    b: float
    H: np.ndarray

    @property
    def weights(self) -> np.ndarray:
        return self.grid.weights

    def symmetrized(self) -> np.ndarray:
        """Return ``D^(1/2) H D^(1/2)``, symmetric positive semidefinite."""
        sw = np.sqrt(self.grid.weights)
        S = sw[:, None] * self.H * sw[None, :]
        return 0.5 * (S + S.T)

    def matrix(self) -> np.ndarray:
        """Return the (non-symmetric) matrix ``Q = H D``."""
        return self.H * self.grid.weights[None, :]


def build_kernel(grid: SimpsonGrid, b: float) -> KernelMatrix:
    if not b > 0:
        raise ValueError(f"support bound b must be positive, got {b!r}")
    p = grid.nodes
    H = kernel_integral(p[:, None] + p[None, :], float(b))
    H.setflags(write=False)
    return KernelMatrix(grid=grid, b=float(b), H=H)


def _vec(grid: SimpsonGrid, u, name: str = "vector") -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.shape != (grid.size,):
        raise ValueError(
            f"{name} must have length {grid.size}, got shape {u.shape}")
    return u


def wm_inner(grid: SimpsonGrid, u, v) -> float:
    """Weighted inner product ``sum_j w_j u_j v_j``."""
    u = _vec(grid, u, "u")
    v = _vec(grid, v, "v")
    return float(np.sum(grid.weights * u * v))


def wm_norm(grid: SimpsonGrid, u) -> float:
    """Norm induced by :func:`wm_inner` (square root included)."""
    u = _vec(grid, u, "u")
    return float(np.sqrt(np.sum(grid.weights * u * u)))


def apply_Q(kernel: KernelMatrix, c) -> np.ndarray:
    """Return ``H D c``."""
    c = _vec(kernel.grid, c, "c")
    return kernel.H @ (kernel.grid.weights * c)


def apply_adjoint(grid: SimpsonGrid, v, t):
    """Evaluate the exponential sum ``sum_j w_j exp(-p_j t) v_j``.

    ``t`` may be a scalar or an array of non-negative reals.
    """
    v = _vec(grid, v, "v")
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ValueError("t must be non-negative")
    out = np.exp(-np.multiply.outer(t_arr, grid.nodes)) @ (grid.weights * v)
    return out if out.ndim else float(out)


def apply_discrete_normal(grid: SimpsonGrid, b: float,
                          g: Callable[[np.ndarray], np.ndarray], t,
                          panels: int = 2000):
    """Apply the discrete normal operator to a function ``g`` on ``[0, b]``.

    The moments ``int_0^b exp(-p_j z) g(z) dz`` are computed with a fixed
    Simpson rule of ``panels`` panels, then combined as in
    :func:`apply_adjoint`.
    """
    fine = build_grid(panels, b)
    z = fine.nodes
    gz = np.asarray(g(z), dtype=float)
    moments = np.exp(-np.multiply.outer(grid.nodes, z)) @ (fine.weights * gz)
    return apply_adjoint(grid, moments, t)
