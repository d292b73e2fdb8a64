"""Exceptions raised by the engine."""


class CGAError(Exception):
    """Base class for all engine errors."""


class InvalidHalfIntError(CGAError, ValueError):
    """Raised when a value is not a half-integer ell >= 3/2."""


class IndexRangeError(CGAError, ValueError):
    """Raised when an index falls outside the range allowed by ell."""


class SubstitutionError(CGAError, ValueError):
    """Raised when a substitution would produce a pole."""


class ZeroDivisionExprError(CGAError, ZeroDivisionError):
    """Raised when dividing by an identically zero expression."""


class ParseError(CGAError, ValueError):
    """Raised on malformed expression text, with the offending position."""

    def __init__(self, message: str, line: int, column: int) -> None:
        super().__init__(f"{message} at line {line}, column {column}")
        self.message = message
        self.line = line
        self.column = column
