"""Exception hierarchy shared by the ctrw modules."""


class DomainError(ValueError):
    """An argument lies outside the domain of the requested quantity."""


class ConfigError(ValueError):
    """A configuration key is unknown or its value is malformed."""

    def __init__(self, key, message):
        self.key = key
        super().__init__(f"{key}: {message}")


class NumericalError(ArithmeticError):
    """Base class for failures of a numerical engine."""


class InversionError(NumericalError):
    """A transform returned a non-finite value on the inversion contour."""

    def __init__(self, message, node=None):
        self.node = node
        super().__init__(message)


class StabilityError(NumericalError):
    """A pole lies in the right half-plane."""


class PoleError(NumericalError):
    """A denominator vanished where it cannot for valid parameters."""


class SolverError(NumericalError):
    """The discretised exit-time system is singular or ill-conditioned."""


class ConditioningError(NumericalError):
    """The conditioning event has (numerically) zero probability."""


class PathCapError(NumericalError):
    """A simulated path exceeded the hard cap on the number of jumps."""
