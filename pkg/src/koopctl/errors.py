"""Exception types shared across the package."""


class KoopctlError(Exception):
    """Base class for all package errors."""


class ConfigurationError(KoopctlError, ValueError):
    """Inconsistent dimensions, bounds or settings."""


class EvaluationError(KoopctlError, ArithmeticError):
    """An observable or utility component produced a non-finite value.

    Parameters
    ----------
    message : str
        Human-readable description.
    index : int or tuple, optional
        Position of the offending observable (flat index, or ``(robot,
        component)`` for utility banks).
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class RejectedSampleError(KoopctlError, ValueError):
    """A regressor sample contained non-finite values and was not used."""


class DivergenceError(KoopctlError, ArithmeticError):
    """Parameter estimates or a model rollout became non-finite."""
