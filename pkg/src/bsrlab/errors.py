"""Exception hierarchy.

The CLI maps :class:`ValidationError` subclasses to exit status 2 and
:class:`NumericError` subclasses to exit status 3.
"""


class BsrlabError(Exception):
    """Base class for all library errors."""


class ValidationError(BsrlabError, ValueError):
    """Input violates a documented precondition or invariant."""


class InvalidArgument(ValidationError):
    pass


class ConfigError(ValidationError):
    pass


class DomainError(ValidationError):
    """A frequency probe was requested outside ``tau > |xi|/2``."""


class SchemaError(ValidationError):
    pass


class CapError(ValidationError):
    """The degree cap is too small for the requested eigenvalue cap."""

    def __init__(self, message, ell=None):
        super().__init__(message)
        self.ell = ell


class PairingError(ValidationError):
    pass


class MissingTraceError(BsrlabError, LookupError):
    """A pairing needs a boundary trace that is flagged as unknown."""


class NumericError(BsrlabError, ArithmeticError):
    pass


class DivergenceError(NumericError):
    pass


class ResolutionError(NumericError):
    """Quadrature could not resolve an oscillatory integrand within the refinement cap."""
