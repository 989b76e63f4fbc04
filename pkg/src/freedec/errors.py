"""Exception types shared across the package."""


class InputError(ValueError):
    """Raised when a caller-supplied argument violates a precondition."""


class NumericalError(RuntimeError):
    """Raised when an iterative routine fails to produce a usable result."""
