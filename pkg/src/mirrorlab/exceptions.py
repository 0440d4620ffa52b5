"""Exception types raised across the package."""


class MirrorLabError(Exception):
    """Base class for all package-specific errors."""


class InvalidDimensionError(MirrorLabError, ValueError):
    """A dimension argument is out of range for the requested object."""


class InvalidOrderError(MirrorLabError, ValueError):
    """A convexity order p is out of range or incompatible with an operation."""


class StepGateError(MirrorLabError, ValueError):
    """A step size or scheme constant violates its admissibility gate."""


class NumericalFailureError(MirrorLabError, RuntimeError):
    """A non-finite value appeared during iteration.

    Carries the offending iterate in ``iterate``.
    """

    def __init__(self, message, iterate=None):
        super().__init__(message)
        self.iterate = iterate


class UnsupportedDiagnosticError(MirrorLabError, ValueError):
    """A certificate was requested for a problem without a known minimizer."""


class OracleFailureError(MirrorLabError, RuntimeError):
    """An inner solve did not converge within its budget.

    Carries the final model-gradient residual in ``residual``.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class StiffnessError(MirrorLabError, RuntimeError):
    """Adaptive integration stalled (step-size underflow).

    Carries the last valid state in ``last_state``.
    """

    def __init__(self, message, last_state=None):
        super().__init__(message)
        self.last_state = last_state


class MalformedTraceError(MirrorLabError, ValueError):
    """Trace arrays have inconsistent lengths or non-increasing times."""


class InsufficientDataError(MirrorLabError, ValueError):
    """Too few usable points remain for a fit."""


class ConfigError(MirrorLabError, ValueError):
    """An experiment configuration is invalid."""
