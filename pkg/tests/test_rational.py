from fractions import Fraction

import pytest

from blform.errors import MalformedInputError
from blform.rational import fmt, to_rational


@pytest.mark.parametrize("raw, want", [
    ("7/12", Fraction(7, 12)),
    ("-1/8", Fraction(-1, 8)),
    (" 3 ", Fraction(3)),
    (2, Fraction(2)),
    (0.5, Fraction(1, 2)),
    ("0.25", Fraction(1, 4)),
    ("4/6", Fraction(2, 3)),
])
def test_accepts_exact_values(raw, want):
    assert to_rational(raw) == want


def test_inexact_decimal_gets_hint():
    with pytest.raises(MalformedInputError, match="use 7/10"):
        to_rational("0.7")
    with pytest.raises(MalformedInputError, match="use 7/10"):
        to_rational(0.7)


@pytest.mark.parametrize("raw", ["1/0", "abc", True, float("nan"), float("inf"), None])
def test_rejects_garbage(raw):
    with pytest.raises(MalformedInputError):
        to_rational(raw)


def test_fmt_is_canonical():
    assert fmt(Fraction(14, 24)) == "7/12"
    assert fmt(Fraction(-3, 1)) == "-3"
    assert to_rational(fmt(Fraction(-5, 17))) == Fraction(-5, 17)
