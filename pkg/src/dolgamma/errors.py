"""Exception types shared across the package."""


class DolgammaError(Exception):
    """Base class for all package errors."""


class ValidationError(DolgammaError, ValueError):
    """Raised when inputs fail structural or domain validation."""


class NumericError(DolgammaError, ArithmeticError):
    """Raised when a numerical routine cannot reach its accuracy target."""


class MedianBeyondHorizon(NumericError):
    """Raised when a requested residual-life median lies past the profile horizon."""


class DiscontinuityWarning(UserWarning):
    """Emitted when a derivative is evaluated at a load-level crossing time.

    The shape function's time derivative jumps at instants where the load
    crosses a grid level, so the returned value is the right-hand limit.
    """
