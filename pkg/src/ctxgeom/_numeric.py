"""Helpers for mixing exact rationals and floats."""
from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence


def to_number(value):
    """Convert ``value`` to a ``Fraction`` when it is exact, else to ``float``.

    Strings such as ``"1/2"`` or ``"3"`` are parsed as rationals; strings with a
    decimal point or exponent are parsed as floats.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not probabilities")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, Rational):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if any(ch in text for ch in ".eE") and "/" not in text:
            return float(text)
        return Fraction(text)
    if isinstance(value, float):
        return value
    # numpy scalars and the like
    try:
        if float(value) == int(value) and "int" in type(value).__name__:
            return Fraction(int(value))
    except (TypeError, ValueError, OverflowError):
        pass
    return float(value)


def is_exact(values: Iterable) -> bool:
    return all(isinstance(v, (Fraction, int)) for v in values)


def as_fractions(values: Sequence) -> tuple:
    return tuple(Fraction(v) for v in values)


def as_floats(values: Sequence) -> tuple:
    return tuple(float(v) for v in values)


def number_to_json(value):
    """Serialize a number: integers stay integers, other rationals become strings."""
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return int(value.numerator)
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, int):
        return value
    return float(value)
