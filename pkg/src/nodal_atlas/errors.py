"""Exception types shared across the package."""


class NodalAtlasError(Exception):
    """Base class for all package errors."""


class InputError(NodalAtlasError, ValueError):
    """Raised when an operation rejects its input (precondition failure)."""


class ConvergenceError(NodalAtlasError, RuntimeError):
    """Raised when an iterative solver does not converge.

    The residual norms observed at termination are stored on ``residuals``.
    """

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


class ConfigError(NodalAtlasError, ValueError):
    """Raised for invalid experiment configuration (CLI exit code 2)."""
