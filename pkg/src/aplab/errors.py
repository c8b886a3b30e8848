"""Exception hierarchy shared by every aplab module."""


class AplabError(Exception):
    """Base class for all library errors."""


class NonConvergence(AplabError):
    """An enclosure could not be narrowed to the requested tolerance."""


class BracketFailure(NonConvergence):
    """Bracket growth for a monotone inversion hit its bound without a sign change."""


class UnknownGenerator(AplabError, KeyError):
    def __init__(self, name):
        super().__init__(name)
        self.name = name

    def __str__(self):
        return f"unknown generator {self.name!r}"


class NotAnIntervalAction(AplabError):
    """A generator handed to the interval extension moves 0 or 1."""


class FixedPointDetected(AplabError):
    """The escape sequence stalled: the action has a global fixed point."""

    def __init__(self, point, message=None):
        super().__init__(message or f"escape sequence stalls at {point}")
        self.point = point


class GeneratorMismatch(AplabError):
    """Two actions compared by the flow metric do not share generator names."""


class TranslationOverflow(AplabError, OverflowError):
    """Iterates outgrew the magnitude guard while estimating a translation number."""


class OutOfRange(AplabError, ValueError):
    """A probability argument outside the open unit interval."""


class ParseError(AplabError, ValueError):
    def __init__(self, message, line, column=1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class ValidationError(AplabError, ValueError):
    """Well-formed input that violates a map or action invariant."""
