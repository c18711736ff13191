"""Adaptive iterative inversion with a discrepancy-type stopping rule.

Each iteration shrinks the regularization parameter geometrically,
``a_n = a0 * q**n``, picks the grid size ``m_n`` from ``a_n``, solves the
regularized system on that grid and blends the new exponential sum into
the running approximation::

    u_n = q * u_{n-1} + (1 - q) * sum_j c_j w_j exp(-p_j t)

The residual surrogate ``G_n = q G_{n-1} + (1 - q) a_n ||c||_W`` is
compared against ``C * delta**epsilon`` after every step.
"""

from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass, field
from typing import Protocol, Sequence, runtime_checkable

import numpy as np

from .operators import build_kernel, wm_norm
from .quadrature import build_grid
from .solver import SingularSystemError, solve_regularized

__all__ = [
    "TransformSource",
    "SourceEvaluationError",
    "InversionConfig",
    "ExpTerm",
    "Reconstruction",
    "IterationRecord",
    "StopReason",
    "InversionReport",
    "choose_m",
    "run_inversion",
    "evaluate",
    "evaluate_grid",
]

A_UNDERFLOW = 1e-300


@runtime_checkable
class TransformSource(Protocol):
    """Anything that returns noisy transform values on ``[0, d]``."""

    delta: float
    d: float

    def value(self, p: float) -> float: ...


class SourceEvaluationError(RuntimeError):
    def __init__(self, index: int, p: float, iteration: int):
        self.index = index
        self.p = p
        self.iteration = iteration
        super().__init__(
            f"transform source failed at node {index} (p={p!r}) "
            f"in iteration {iteration}")


@dataclass(frozen=True)
class InversionConfig:
    """Schedule and stopping parameters.

    ``q``, ``kappa`` and ``C`` default to ``None`` and are then derived
    from ``delta`` and ``d``: ``q = sqrt(max(delta, 1e-16))``, ``kappa = 1``
    for ``delta > 1e-6`` and ``0.3`` otherwise, ``C = sqrt(d) + 0.01``.

    Setting ``stop_without_blend`` drops the ``(1 - q)`` factor from the
    ``G`` recursion, matching the variant written in the algorithm listing.
    """

    delta: float = 0.0
    d: float = 5.0
    b: float = 10.0
    a0: float = 0.1
    q: float | None = None
    kappa: float | None = None
    C: float | None = None
    epsilon: float = 0.99
    max_iter: int = 50
    m_cap: int = 300
    stop_without_blend: bool = False

    def __post_init__(self):
        if not self.delta >= 0:
            raise ValueError(f"delta must be >= 0, got {self.delta!r}")
        if not self.d > 0:
            raise ValueError(f"d must be positive, got {self.d!r}")
        if not self.b > 0:
            raise ValueError(f"b must be positive, got {self.b!r}")
        if not self.a0 > 0:
            raise ValueError(f"a0 must be positive, got {self.a0!r}")
        if self.q is None:
            object.__setattr__(self, "q", math.sqrt(max(self.delta, 1e-16)))
        if self.kappa is None:
            object.__setattr__(self, "kappa",
                               1.0 if self.delta > 1e-6 else 0.3)
        if self.C is None:
            object.__setattr__(self, "C", math.sqrt(self.d) + 0.01)
        if not 0 < self.q < 1:
            raise ValueError(f"q must lie in (0, 1), got {self.q!r}")
        if not self.kappa > 0:
            raise ValueError(f"kappa must be positive, got {self.kappa!r}")
        if not self.C > math.sqrt(self.d):
            raise ValueError(
                f"C must exceed sqrt(d)={math.sqrt(self.d):.6g}, got {self.C!r}")
        if not 0 < self.epsilon < 1:
            raise ValueError(
                f"epsilon must lie in (0, 1), got {self.epsilon!r}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ValueError(
                f"max_iter must be a positive integer, got {self.max_iter!r}")
        if int(self.m_cap) != self.m_cap or self.m_cap < 2 or self.m_cap % 2:
            raise ValueError(
                f"m_cap must be an even integer >= 2, got {self.m_cap!r}")

    @property
    def threshold(self) -> float:
        return self.C * self.delta ** self.epsilon

    def with_overrides(self, **overrides) -> "InversionConfig":
        """Copy with some fields replaced; derived fields are re-derived
        unless given explicitly."""
        base = {k: getattr(self, k) for k in self.__dataclass_fields__}
        for name in ("q", "kappa", "C"):
            if name not in overrides and any(
                    k in overrides for k in ("delta", "d")):
                base[name] = None
        base.update({k: v for k, v in overrides.items() if v is not None})
        return InversionConfig(**base)


@dataclass(frozen=True)
class ExpTerm:
    amplitude: float
    rate: float


@dataclass(frozen=True)
class Reconstruction:
    """Exponential sum ``sum_k amplitude_k * exp(-rate_k * t)``.

    Terms from all iterations are kept flat, oldest first; equal rates from
    different iterations are not merged.
    """

    amplitudes: np.ndarray
    rates: np.ndarray
    config: InversionConfig | None = None

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=float)
        rates = np.array(self.rates, dtype=float)
        if amps.shape != rates.shape or amps.ndim != 1:
            raise ValueError("amplitudes and rates must be 1-d and equal length")
        if np.any(rates < 0) or not np.all(np.isfinite(amps)):
            raise ValueError("rates must be >= 0 and amplitudes finite")
        amps.setflags(write=False)
        rates.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "rates", rates)

    @classmethod
    def from_terms(cls, terms: Sequence[ExpTerm],
                   config: InversionConfig | None = None) -> "Reconstruction":
        return cls(np.array([t.amplitude for t in terms], dtype=float),
                   np.array([t.rate for t in terms], dtype=float), config)

    @property
    def terms(self) -> list[ExpTerm]:
        return [ExpTerm(float(a), float(r))
                for a, r in zip(self.amplitudes, self.rates)]

    def __len__(self) -> int:
        return len(self.amplitudes)

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        out = np.exp(-np.multiply.outer(t_arr, self.rates)) @ self.amplitudes
        return out if out.ndim else float(out)


def evaluate(recon: Reconstruction, t: float) -> float:
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t!r}")
    return float(recon(float(t)))


def evaluate_grid(recon: Reconstruction, ts) -> list[float]:
    ts = np.asarray(ts, dtype=float).ravel()
    if np.any(ts < 0):
        raise ValueError("all t must be non-negative")
    if ts.size == 0:
        return []
    return [float(v) for v in recon(ts)]


@dataclass(frozen=True)
class IterationRecord:
    n: int
    a: float
    m: int
    G: float
    coeff_norm: float
    solve_residual: float


class StopReason(str, enum.Enum):
    THRESHOLD_MET = "threshold-met"
    MAX_ITER = "max-iter"
    A_UNDERFLOW = "a-underflow"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class InversionReport:
    n_delta: int
    iterations: tuple[IterationRecord, ...]
    stop_reason: StopReason
    threshold: float
    wall_time: float = field(compare=False)

    @property
    def final(self) -> IterationRecord | None:
        return self.iterations[-1] if self.iterations else None

    @property
    def a_final(self) -> float:
        return self.final.a if self.final else math.nan

    @property
    def m_final(self) -> int:
        return self.final.m if self.final else 0

    @property
    def G_final(self) -> float:
        return self.final.G if self.final else 0.0


def choose_m(kappa: float, a0: float, a_n: float, m_cap: int) -> int:
    """Smallest even integer ``>= kappa * (a0 / a_n)**(1/4)``, clamped to
    ``[2, m_cap]``."""
    if not (kappa > 0 and a0 > 0 and a_n > 0):
        raise ValueError("kappa, a0 and a_n must be positive")
    if a_n > a0:
        raise ValueError(f"a_n={a_n!r} exceeds a0={a0!r}")
    if m_cap < 2 or m_cap % 2:
        raise ValueError(f"m_cap must be an even integer >= 2, got {m_cap!r}")
    target = kappa * (a0 / a_n) ** 0.25
    m = 2 * math.ceil(target / 2.0)
    return int(min(m_cap, max(2, m)))


def run_inversion(source: TransformSource, config: InversionConfig
                  ) -> tuple[Reconstruction, InversionReport]:
    """Invert the transform supplied by ``source``.

    Returns the accumulated reconstruction and a report with one record per
    iteration.  Iteration stops at the first ``n`` with
    ``G_n <= C * delta**epsilon``, at ``config.max_iter``, or when ``a_n``
    would underflow below 1e-300.
    """
    if not math.isclose(source.d, config.d, rel_tol=1e-12):
        raise ValueError(
            f"source interval end {source.d!r} differs from config d={config.d!r}")
    start = time.perf_counter()
    q = config.q
    blend = 1.0 if config.stop_without_blend else 1.0 - q
    threshold = config.threshold
    amplitudes = np.empty(0)
    rates = np.empty(0)
    G = 0.0
    records: list[IterationRecord] = []
    reason = StopReason.MAX_ITER
    cache: dict[int, tuple] = {}

    for n in range(1, config.max_iter + 1):
        a_n = config.a0 * q ** n
        if a_n < A_UNDERFLOW:
            reason = StopReason.A_UNDERFLOW
            break
        m_n = choose_m(config.kappa, config.a0, a_n, config.m_cap)
        if m_n not in cache:
            grid = build_grid(m_n, config.d)
            rhs = np.empty(grid.size)
            for j, p in enumerate(grid.nodes):
                try:
                    rhs[j] = source.value(float(p))
                except Exception as exc:
                    raise SourceEvaluationError(j, float(p), n) from exc
            cache[m_n] = (grid, build_kernel(grid, config.b), rhs)
        grid, kernel, rhs = cache[m_n]
        try:
            sol = solve_regularized(kernel, a_n, rhs)
        except SingularSystemError as exc:
            raise SingularSystemError(exc.a, exc.m, iteration=n) from exc

        amplitudes = np.concatenate(
            [q * amplitudes, (1.0 - q) * sol.c * grid.weights])
        rates = np.concatenate([rates, grid.nodes])
        coeff_norm = wm_norm(grid, sol.c)
        G = q * G + blend * a_n * coeff_norm
        records.append(IterationRecord(n=n, a=a_n, m=m_n, G=G,
                                       coeff_norm=coeff_norm,
                                       solve_residual=sol.residual_inf))
        if G <= threshold:
            reason = StopReason.THRESHOLD_MET
            break

    recon = Reconstruction(amplitudes, rates, config)
    report = InversionReport(n_delta=len(records), iterations=tuple(records),
                             stop_reason=reason, threshold=threshold,
                             wall_time=time.perf_counter() - start)
    return recon, report
