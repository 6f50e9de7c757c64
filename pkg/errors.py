"""
Error Types (错误类型)

Exception hierarchy shared by every module. Orbit statuses (escaped,
domain violation) are data and never appear here.
"""


class FraclogError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 3

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class ConfigurationError(FraclogError, ValueError):
    """A type invariant or a run parameter is invalid."""

    exit_code = 2


class DomainError(FraclogError, ValueError):
    """An argument lies outside the real domain of a map or special function."""

    exit_code = 2


class AccuracyError(FraclogError, ArithmeticError):
    """Quadrature exhausted its node budget before reaching the target error."""


class OrbitFailedError(FraclogError):
    """An orbit escaped or left the real domain where a completed orbit was required."""


class InsufficientSamplesError(FraclogError):
    """Too few recorded samples for the requested period search."""


class TransitionNotFoundError(FraclogError):
    """A period doubling could not be located in the scanned range."""
