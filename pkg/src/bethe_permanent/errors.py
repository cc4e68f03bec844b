"""Exception hierarchy shared across the package."""


class PermanentError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(PermanentError, ValueError):
    """Malformed matrix or point-set text."""


class ShapeError(PermanentError, ValueError):
    """Non-square matrix, ragged rows, or mismatched set sizes."""


class DomainError(PermanentError, ValueError):
    """Input outside the mathematical domain (e.g. negative weights)."""


class SizeError(PermanentError, ValueError):
    """Problem too large for an exponential-time routine."""


class NumericError(PermanentError, ArithmeticError):
    """Non-finite or degenerate intermediate value."""
