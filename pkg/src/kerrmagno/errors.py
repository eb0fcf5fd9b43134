"""Exception hierarchy shared by all modules."""


class KerrMagnoError(Exception):
    """Base class for all package errors."""


class DomainError(KerrMagnoError, ValueError):
    """An argument lies outside the domain of an operation."""


class NoKerrTurningPoints(DomainError):
    """Raised when the effective Kerr coefficient vanishes (no switching points)."""


class BistabilitySignError(DomainError):
    """Raised when the critical-drive radicand is negative.

    For K' > 0 bistability requires Delta_m < eta * Delta_a (and the reverse
    inequality for K' < 0).
    """


class NoStationaryStateError(KerrMagnoError):
    """The drift matrix is not Hurwitz, so no stationary Gaussian state exists."""


class NumericalError(KerrMagnoError, ArithmeticError):
    """A numerical routine failed to produce a trustworthy result."""


class IntegrationError(NumericalError):
    """Time integration failed (step-size underflow or step budget exhausted).

    ``partial`` holds whatever part of the trajectory was completed.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class PhysicalityError(NumericalError):
    """A covariance matrix violates the uncertainty principle beyond tolerance."""


class InsufficientDataError(KerrMagnoError, ValueError):
    """A trajectory is too short for the requested analysis."""


class ConfigError(KerrMagnoError, ValueError):
    """Invalid or incomplete configuration; ``key`` names the offending entry."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key
