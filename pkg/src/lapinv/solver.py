"""Stable solution of ``(a I + H D) c = rhs``."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .operators import KernelMatrix

__all__ = [
    "RegularizedSolve",
    "SingularSystemError",
    "ConditioningWarning",
    "solve_regularized",
]


class SingularSystemError(np.linalg.LinAlgError):
    """Raised when neither factorization of the shifted system succeeds."""

    def __init__(self, a: float, m: int, iteration: int | None = None):
        self.a = a
        self.m = m
        self.iteration = iteration
        msg = f"regularized system is singular (a={a!r}, m={m})"
        if iteration is not None:
            msg += f" at iteration {iteration}"
        super().__init__(msg)


class ConditioningWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class RegularizedSolve:
    a: float
    c: np.ndarray
    residual_inf: float
    symmetric_path: bool = True


def solve_regularized(kernel: KernelMatrix, a: float, rhs) -> RegularizedSolve:
    """Solve the regularized system for the coefficient vector ``c``.

    The substitution ``y = D^(1/2) c`` turns the system into the symmetric
    positive definite one ``(a I + D^(1/2) H D^(1/2)) y = D^(1/2) rhs``,
    which is solved by Cholesky.  If Cholesky breaks down the original
    system is solved with pivoted LU instead.

    Parameters
    ----------
    kernel : KernelMatrix
    a : float
        Regularization parameter, ``a > 0``.
    rhs : array_like
        Data vector of length ``m + 1``.

    Returns
    -------
    RegularizedSolve
        Coefficients and the max-norm residual of the unsymmetric system.

    Raises
    ------
    ValueError
        For ``a <= 0`` or a wrongly sized ``rhs``.
    SingularSystemError
        If both factorizations fail.
    """
    if not a > 0:
        raise ValueError(f"regularization parameter must be positive, got {a!r}")
    grid = kernel.grid
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape != (grid.size,):
        raise ValueError(
            f"rhs must have length {grid.size}, got shape {rhs.shape}")
    n = grid.size
    sw = np.sqrt(grid.weights)
    S = kernel.symmetrized()

    lam_max = scipy.linalg.eigh(S, eigvals_only=True,
                                subset_by_index=[n - 1, n - 1])[0]
    if a < 1e-14 * lam_max:
        warnings.warn(
            f"a={a:.3g} is below 1e-14 * lambda_max={lam_max:.3g}; "
            "the solve is dominated by roundoff",
            ConditioningWarning, stacklevel=2)

    A = a * np.eye(n) + kernel.matrix()
    symmetric = True
    try:
        factor = scipy.linalg.cho_factor(a * np.eye(n) + S, lower=True,
                                         check_finite=False)
        c = scipy.linalg.cho_solve(factor, sw * rhs, check_finite=False) / sw
    except np.linalg.LinAlgError:
        symmetric = False
        try:
            c = scipy.linalg.solve(A, rhs)
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise SingularSystemError(a, grid.m) from exc
    if not np.all(np.isfinite(c)):
        raise SingularSystemError(a, grid.m)
    residual = float(np.max(np.abs(A @ c - rhs))) if n else 0.0
    return RegularizedSolve(a=float(a), c=c, residual_inf=residual,
                            symmetric_path=symmetric)
