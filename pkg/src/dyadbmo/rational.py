"""Exact rational helpers shared by every module.

All positions, lengths, values and norms are :class:`fractions.Fraction`.
On disk a rational is the string ``"p/q"`` (or ``"p"`` for integers).
"""
from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Iterable, Union

Rat = Fraction
RatLike = Union[Fraction, int, str]


def rat(x: RatLike) -> Fraction:
    """Coerce an int, Fraction or ``"p/q"`` string to a Fraction.

    Floats are refused: they would silently import rounding error.
    """
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        s = x.strip()
        if not s:
            raise ValueError("empty rational literal")
        try:
            return Fraction(s)
        except ValueError as exc:
            raise ValueError(f"malformed rational literal {x!r}") from exc
    raise TypeError(f"cannot convert {type(x).__name__} to an exact rational")


def fmt(x: Fraction) -> str:
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def decimal(x: Fraction, digits: int = 12) -> float:
    """Non-authoritative float rendering, rounded to ``digits`` significant digits."""
    return float(f"{float(x):.{digits}g}")


def frac_part(x: Fraction) -> Fraction:
    return x - (x.numerator // x.denominator)


def mod1(x: Fraction) -> Fraction:
    return frac_part(x)


def nearest_int_distance(x: Fraction) -> Fraction:
    f = frac_part(x)
    return min(f, 1 - f)


def common_denominator(xs: Iterable[Fraction]) -> int:
    out = 1
    for x in xs:
        out = lcm(out, x.denominator)
    return out


def is_power_of_two(q: int) -> bool:
    return q > 0 and q & (q - 1) == 0
