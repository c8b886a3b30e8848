"""Small helpers around :class:`fractions.Fraction`."""

from __future__ import annotations

import math
import re
from decimal import Decimal, localcontext
from fractions import Fraction
from numbers import Rational

_RATIONAL_RE = re.compile(r"^[+-]?\d+(/\d+)?$")


def Q(value) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to a Fraction.

    Floats are refused on purpose: every map in this package is exact.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, str):
        return parse_rational(value)
    if hasattr(value, "numerator") and hasattr(value, "denominator") and not isinstance(value, float):
        return Fraction(int(value.numerator), int(value.denominator))
    raise TypeError(f"expected an exact rational, got {type(value).__name__}")


def parse_rational(text: str) -> Fraction:
    text = text.strip()
    if not _RATIONAL_RE.match(text):
        raise ValueError(f"not a rational literal: {text!r}")
    value = Fraction(text)
    if "/" in text and int(text.split("/")[1]) == 0:
        raise ZeroDivisionError(text)
    return value


def format_rational(q: Fraction) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def decimal_string(q: Fraction, digits: int = 12) -> str:
    """Decimal rendering with ``digits`` significant digits (for CSV output)."""
    q = Fraction(q)
    if q == 0:
        return "0"
    with localcontext() as ctx:
        ctx.prec = digits
        d = Decimal(q.numerator) / Decimal(q.denominator)
    return format(d, "g")


def dyadic_round(q: Fraction, bits: int) -> Fraction:
    """Nearest multiple of ``2**-bits``."""
    scale = 1 << bits
    return Fraction(round(Fraction(q) * scale), scale)


def dyadic_floor(q: Fraction, bits: int) -> Fraction:
    scale = 1 << bits
    return Fraction(math.floor(Fraction(q) * scale), scale)


def bits_for(tol: Fraction) -> int:
    """Smallest ``k`` with ``2**-k <= tol``."""
    tol = Fraction(tol)
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    k = 0
    while Fraction(1, 1 << k) > tol:
        k += 1
    return k
