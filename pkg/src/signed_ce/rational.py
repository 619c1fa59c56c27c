"""Exact rational helpers and the ``"num/den"`` text encoding."""
from __future__ import annotations

from fractions import Fraction
from numbers import Rational

__all__ = ["Q", "to_q", "format_q", "parse_q", "format_float"]

Q = Fraction


def to_q(value) -> Fraction:
    """Convert ints, Fractions, decimal strings and floats to a Fraction.

    Floats are converted exactly (binary value), so ``to_q(0.9)`` is not 9/10.
    Use a string when the decimal value is intended.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, str):
        return parse_q(value)
    return Fraction(value)


def format_q(value) -> str:
    q = to_q(value)
    return f"{q.numerator}/{q.denominator}"


def parse_q(text: str) -> Fraction:
    text = text.strip()
    if "/" in text:
        num, den = text.split("/")
        return Fraction(int(num), int(den))
    return Fraction(text)


def format_float(value) -> str:
    """17 significant digits: enough to round-trip a double."""
    return format(float(value), ".17g")
