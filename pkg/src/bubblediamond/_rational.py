"""Exact-rational helpers shared by every module.

All coefficient work is done with :class:`fractions.Fraction`.  Values leave
the exact world only at the edges (CSV export, square roots, sparse solves),
through the converters below.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Any

import mpmath

DEFAULT_PRECISION = 50


def frac_str(x: Fraction) -> str:
    """Serialize as ``"num/den"`` (always with a denominator)."""
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_frac(s: str) -> Fraction:
    return Fraction(s)


def to_mpf(x: Any, prec: int | None = None) -> mpmath.mpf:
    """Convert a Fraction/int/float to an mpmath float at the current (or given) precision."""
    if prec is not None:
        with mpmath.workdps(prec):
            return to_mpf(x)
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)


def converter(kind: str, prec: int = DEFAULT_PRECISION):
    """Return a function mapping Fractions into the scalar type named by *kind*.

    ``kind`` is one of ``"exact"`` (Fraction), ``"float"`` or ``"mp"``
    (mpmath at ``prec`` decimal digits; the caller owns the mp context).
    """
    if kind == "exact":
        return Fraction
    if kind == "float":
        return float
    if kind == "mp":
        return to_mpf
    raise ValueError(f"unknown scalar kind {kind!r}")


def decimal_str(x: Any, digits: int) -> str:
    """Fixed significant-digit decimal rendering for CSV output."""
    if isinstance(x, Fraction):
        with mpmath.workdps(digits + 5):
            return mpmath.nstr(to_mpf(x), digits, strip_zeros=False)
    with mpmath.workdps(digits + 5):
        return mpmath.nstr(mpmath.mpf(x), digits, strip_zeros=False)
