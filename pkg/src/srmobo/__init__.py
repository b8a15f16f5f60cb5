"""Multi-objective Bayesian optimization with three Gaussian processes.

One GP models a randomly weighted scalarization of the objectives, one
classifies Pareto-optimal points and one classifies feasibility; the
next sample maximizes the product of their acquisitions.
"""

from .acquisition import VARIANTS, AcqKind, AcquisitionSpec, MaximizerConfig
from .benchmarks import BenchmarkSpec, evaluate, true_front
from .driver import ObservationRecord, Optimizer, RunConfig, RunResult, initialize, run
from .gp import FitConfig, GpModel, KernelKind, KernelSpec, fit, predict
from .metrics import MetricsReport, evaluate_front, gd, hypervolume, igd, lrhd

__all__ = [
    "VARIANTS",
    "AcqKind",
    "AcquisitionSpec",
    "BenchmarkSpec",
    "FitConfig",
    "GpModel",
    "KernelKind",
    "KernelSpec",
    "MaximizerConfig",
    "MetricsReport",
    "ObservationRecord",
    "Optimizer",
    "RunConfig",
    "RunResult",
    "evaluate",
    "evaluate_front",
    "fit",
    "gd",
    "hypervolume",
    "igd",
    "initialize",
    "lrhd",
    "predict",
    "run",
    "true_front",
]

__version__ = "0.1.0"
