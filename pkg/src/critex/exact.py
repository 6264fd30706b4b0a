"""Exact rational arithmetic helpers shared across the package.

All scaling parameters (spatial orders, breakpoints, critical exponents) are
kept as :class:`fractions.Fraction` so that the exponent engine can assert
exact equalities.  Values on the extended half line ``[0, inf]`` are modelled
as ``Fraction | float`` where the only floats ever stored are ``math.inf`` and
``-math.inf``; the native ordering between Fraction and float infinity does
the right thing.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Union

ExtendedRational = Union[Fraction, float]

POS_INF: float = math.inf
NEG_INF: float = -math.inf


def is_pos_inf(value: ExtendedRational) -> bool:
    return isinstance(value, float) and math.isinf(value) and value > 0


def is_neg_inf(value: ExtendedRational) -> bool:
    return isinstance(value, float) and math.isinf(value) and value < 0


def is_finite(value: ExtendedRational) -> bool:
    return isinstance(value, Fraction)


def parse_rational(value) -> Fraction:
    """Parse a rational from an int or a string like ``"3"`` or ``"-5/4"``.

    Floats are rejected on purpose: silent binary rounding would defeat the
    exactness guarantees downstream.
    """
    if isinstance(value, bool):
        raise ValueError(f"not a rational: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"malformed rational string: {value!r}") from exc
    raise ValueError(f"not a rational: {value!r}")


def format_rational(value: Fraction) -> str:
    """Render a Fraction as ``"p/q"``, or ``"p"`` when the denominator is 1."""
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def format_extended(value: ExtendedRational | None) -> str | None:
    """Render an extended rational for reports; infinities become ``"inf"``."""
    if value is None:
        return None
    if is_pos_inf(value):
        return "inf"
    if is_neg_inf(value):
        return "-inf"
    return format_rational(Fraction(value))
