"""Data-driven scenario generation for chance-constrained programs.

Calibrates a chi-square divergence ball around a parametric MLE, converts
the robust tolerance into a Monte Carlo sample size, draws scenarios from a
(possibly mixed) generating distribution and solves the sampled program.
"""

from .errors import (
    CCScenError,
    ConvergenceError,
    DomainError,
    IntegrandDivergenceError,
    SizeError,
    StageTwoUnnecessary,
    UnattainableError,
    ZeroToleranceError,
)

__version__ = "0.1.0"

__all__ = [
    "CCScenError",
    "ConvergenceError",
    "DomainError",
    "IntegrandDivergenceError",
    "SizeError",
    "StageTwoUnnecessary",
    "UnattainableError",
    "ZeroToleranceError",
    "__version__",
]
