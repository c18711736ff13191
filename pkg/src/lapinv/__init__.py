"""Inversion of the Laplace transform from noisy data on a real interval.

The unknown function is represented as an exponential sum built from the
Laplace kernel; an adaptive iteration chooses the regularization parameter
and the grid size, and a discrepancy-type rule stops it.
"""

__version__ = "0.1.0"

from .quadrature import SimpsonGrid, build_grid, integrate_sampled
from .operators import (KernelMatrix, apply_adjoint, apply_discrete_normal,
                        apply_Q, build_kernel, wm_inner, wm_norm)
from .solver import (ConditioningWarning, RegularizedSolve,
                     SingularSystemError, solve_regularized)
from .inversion import (ExpTerm, InversionConfig, InversionReport,
                        IterationRecord, Reconstruction, SourceEvaluationError,
                        StopReason, TransformSource, choose_m, evaluate,
                        evaluate_grid, run_inversion)
from .benchmarks import (EXAMPLES, BenchRow, ExamplePair, NoisySource,
                         exact_function, exact_transform, mae,
                         perturb_source, run_benchmark, run_example13)
from .io import SampledTransform, load_transform, transform_value
