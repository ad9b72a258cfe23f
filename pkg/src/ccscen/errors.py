"""Exception hierarchy shared by all modules."""


class CCScenError(Exception):
    """Base class for library errors."""


class DomainError(CCScenError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class ConvergenceError(CCScenError, ArithmeticError):
    """An iterative method stopped before reaching its tolerance.

    ``estimate`` carries the best value available when it stopped.
    """

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class IntegrandDivergenceError(CCScenError, ArithmeticError):
    """A radial integrand failed to decay, so the integral diverges."""


class SizeError(CCScenError):
    """Sample-size computation failed (overflow or degenerate request)."""


class StageTwoUnnecessary(SizeError):
    """The stage-one sample alone already certifies the requested level."""

    def __init__(self, message, n1):
        super().__init__(message)
        self.n1 = n1


class ZeroToleranceError(CCScenError):
    """The translated tolerance is zero: no finite sample size exists."""


class UnattainableError(CCScenError):
    """An inverse problem has no solution on the admissible domain."""
