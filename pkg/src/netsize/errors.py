"""Exception types raised across the package."""


class NetsizeError(Exception):
    """Base class for all package errors."""


class ValidationError(NetsizeError, ValueError):
    """Invalid model specification, configuration or input file.

    ``field`` names the offending field when one can be identified.
    """

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class DomainError(NetsizeError, ValueError):
    """A state lies outside the support of the posterior."""


class ConsistencyError(NetsizeError, ValueError):
    """Observed data contradicts itself (e.g. degree below within-sample degree)."""


class EstimatorUndefinedError(NetsizeError, ArithmeticError):
    """The estimator is not defined for this sample (e.g. NSUM with no induced edges)."""


class InitializationError(NetsizeError, RuntimeError):
    """No feasible starting state exists for the chain."""


class OracleSizeError(NetsizeError, ValueError):
    """Instance too large for brute-force enumeration."""


class MomentWarning(UserWarning):
    """The posterior variance of N is not guaranteed to exist."""
