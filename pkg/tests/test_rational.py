from fractions import Fraction

import pytest
from hypothesis import given

from aplab.rational import Q, bits_for, decimal_string, dyadic_floor, dyadic_round, format_rational, parse_rational
from conftest import rationals


def test_q_accepts_exact_values_only():
    assert Q(3) == 3
    assert Q("6/4") == Fraction(3, 2)
    with pytest.raises(TypeError):
        Q(0.5)
    with pytest.raises(TypeError):
        Q(True)


@pytest.mark.parametrize("text,value", [("7", Fraction(7)), ("-3/6", Fraction(-1, 2)), ("0", Fraction(0))])
def test_parse(text, value):
    assert parse_rational(text) == value


@pytest.mark.parametrize("bad", ["", "1/0", "1.5", "a", "1/-2", "1//2"])
def test_parse_rejects(bad):
    with pytest.raises((ValueError, ZeroDivisionError)):
        parse_rational(bad)


@given(rationals)
def test_format_parse_round_trip(q):
    assert parse_rational(format_rational(q)) == q


def test_format_lowest_terms():
    assert format_rational(Fraction(4, 8)) == "1/2"
    assert format_rational(Fraction(-6, 3)) == "-2"


def test_decimal_string_significant_digits():
    assert decimal_string(Fraction(1, 3)) == "0.333333333333"
    assert decimal_string(Fraction(0)) == "0"


@given(rationals)
def test_dyadic_rounding(q):
    r = dyadic_round(q, 10)
    assert abs(r - q) <= Fraction(1, 2**11)
    assert (r * 2**10).denominator == 1
    f = dyadic_floor(q, 10)
    assert f <= q < f + Fraction(1, 2**10)


def test_bits_for():
    assert Fraction(1, 2 ** bits_for(Fraction(1, 1000))) <= Fraction(1, 1000)
