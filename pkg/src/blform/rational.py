"""Strict conversion of user input to exact rationals.

Decimal notation is accepted only when the decimal literal denotes the same
number as its binary floating point value (``0.5``, ``-0.125``).  Anything
else (``0.7``) is rejected because a float cannot carry the exact value and
the checkers distinguish strict inequalities from equalities.
"""

from __future__ import annotations

import re
from fractions import Fraction
from numbers import Rational

from .errors import MalformedInputError

_FRACTION_RE = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+)\s*)?$")


def _hint(text):
    try:
        exact = Fraction(text)
    except (ValueError, ZeroDivisionError):
        return ""
    return f" (use {exact.numerator}/{exact.denominator})"


def to_rational(value) -> Fraction:
    """Convert ``value`` to a Fraction, refusing inexact decimals."""
    if isinstance(value, bool):
        raise MalformedInputError(f"expected a rational, got boolean {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, Rational):
        return Fraction(value.numerator, value.denominator)
    if isinstance(value, float):
        if value != value or value in (float("inf"), float("-inf")):
            raise MalformedInputError(f"expected a finite rational, got {value!r}")
        exact = Fraction(value)
        if exact != Fraction(repr(value)):
            raise MalformedInputError(
                f"{value!r} is not exactly representable{_hint(repr(value))}"
            )
        return exact
    if isinstance(value, str):
        m = _FRACTION_RE.match(value)
        if m:
            num, den = m.groups()
            if den is not None and int(den) == 0:
                raise MalformedInputError(f"zero denominator in {value!r}")
            return Fraction(int(num), int(den) if den else 1)
        try:
            as_float = float(value)
            exact = Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise MalformedInputError(f"cannot parse {value!r} as a rational") from None
        if Fraction(as_float) != exact:
            raise MalformedInputError(
                f"decimal {value!r} is not exactly representable{_hint(value)}"
            )
        return exact
    raise MalformedInputError(f"expected a rational, got {type(value).__name__}")


def fmt(q: Fraction) -> str:
    """Canonical string form used in JSON output ("7/12", "-1/8", "2")."""
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"
