"""Exception types shared across the package."""


class PullError(Exception):
    pass


class ArgumentError(PullError, ValueError):
    """Bad argument value (out-of-range id, invalid ratio, shape mismatch)."""


class ValidationError(PullError, ValueError):
    """Malformed graph, weight, or file content."""


class CapacityError(PullError, ValueError):
    """Request exceeds what the input can supply (too few non-edges, oracle cap)."""


class NumericError(PullError, ArithmeticError):
    """Non-finite value produced during propagation or training."""


class ClampWarning(RuntimeWarning):
    """A probability was clamped away from 0 or 1 before taking a log."""
