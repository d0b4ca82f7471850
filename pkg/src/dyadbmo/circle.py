"""Circle geometry and translated dyadic filtrations.

The circle is the unit interval ``[0, 1)`` with arcs written as half-open
sets ``(start, start + length]`` taken modulo 1; one full turn corresponds to
``2*pi`` radians.  A shift ``delta`` translates the usual dyadic system so
that its level-``n`` intervals are ``(delta + k/2^n, delta + (k+1)/2^n]``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Optional, Sequence

from .rational import RatLike, is_power_of_two, mod1, nearest_int_distance, rat

BASE = "base"
SHIFTED = "shifted"


class InadmissibleShift(ValueError):
    """Raised when an operation needs d(delta) > 0 but got a dyadic shift."""


def dyadic_distance(delta: RatLike) -> Fraction:
    """Return min over n >= 0 of the distance from 2^n * delta to the integers.

    For ``delta = p/q`` the residues ``2^n p mod q`` are eventually periodic, so
    the infimum is a minimum over at most ``q`` residues; the loop stops at the
    first repeated residue.
    """
    delta = rat(delta)
    if not 0 <= delta < 1:
        raise ValueError(f"shift must lie in [0, 1), got {delta}")
    p, q = delta.numerator, delta.denominator
    if is_power_of_two(q):
        return Fraction(0)
    seen = set()
    r = p % q
    best = q
    while r not in seen:
        seen.add(r)
        best = min(best, r, q - r)
        r = (2 * r) % q
    return Fraction(best, q)


def pairwise_distance(deltas: Sequence[RatLike]) -> Fraction:
    """min over i != j of d(delta_i - delta_j mod 1).

    d(x) = d(1 - x), so each unordered pair is computed once.
    """
    ds = [rat(x) for x in deltas]
    if len(ds) < 2:
        raise ValueError("pairwise distance needs at least two shifts")
    best: Optional[Fraction] = None
    for i in range(len(ds)):
        for j in range(i + 1, len(ds)):
            d = dyadic_distance(mod1(ds[i] - ds[j]))
            if best is None or d < best:
                best = d
    assert best is not None
    return best


@dataclass(frozen=True)
class Shift:
    delta: Fraction
    distance: Fraction = field(init=False, compare=False, repr=False)

    def __post_init__(self) -> None:
        d = rat(self.delta)
        object.__setattr__(self, "delta", d)
        object.__setattr__(self, "distance", dyadic_distance(d))

    @property
    def admissible(self) -> bool:
        return self.distance > 0

    def require_admissible(self) -> None:
        if not self.admissible:
            raise InadmissibleShift(f"inadmissible shift: d(δ)=0 for δ={self.delta}")


BASE_SHIFT = Shift(Fraction(0))


@dataclass(frozen=True)
class Arc:
    """The half-open arc (start, start + length] modulo 1."""

    start: Fraction
    length: Fraction

    def __post_init__(self) -> None:
        s, ln = rat(self.start), rat(self.length)
        if not 0 <= s < 1:
            raise ValueError(f"arc start must lie in [0, 1), got {s}")
        if not 0 < ln <= 1:
            raise ValueError(f"arc length must lie in (0, 1], got {ln}")
        object.__setattr__(self, "start", s)
        object.__setattr__(self, "length", ln)

    @classmethod
    def between(cls, a: RatLike, b: RatLike) -> "Arc":
        """Arc from a to b going counter-clockwise; a == b gives the full circle."""
        a, b = mod1(rat(a)), mod1(rat(b))
        ln = mod1(b - a)
        return cls(a, ln if ln else Fraction(1))

    @property
    def end(self) -> Fraction:
        """Right endpoint on the unwrapped line; may exceed 1."""
        return self.start + self.length

    @property
    def wraps(self) -> bool:
        return self.end > 1

    @property
    def is_full(self) -> bool:
        return self.length == 1

    def contains_point(self, t: RatLike) -> bool:
        u = mod1(rat(t) - self.start)
        if u == 0:
            u = Fraction(1)
        return u <= self.length

    def contains(self, other: "Arc") -> bool:
        if self.is_full:
            return True
        u = mod1(other.start - self.start)
        return u + other.length <= self.length

    def radians(self) -> tuple[float, float]:
        return (2 * math.pi * float(self.start), 2 * math.pi * float(self.length))


@dataclass(frozen=True)
class DyadicInterval:
    level: int
    index: int
    shift: Shift = BASE_SHIFT

    def __post_init__(self) -> None:
        if self.level < 0:
            raise ValueError("level must be >= 0")
        if not 0 <= self.index < 2 ** self.level:
            raise ValueError(f"index {self.index} out of range for level {self.level}")

    @property
    def length(self) -> Fraction:
        return Fraction(1, 2 ** self.level)

    @property
    def arc(self) -> Arc:
        return interval_bounds(self)

    def children(self) -> tuple["DyadicInterval", "DyadicInterval"]:
        n, k = self.level + 1, 2 * self.index
        return DyadicInterval(n, k, self.shift), DyadicInterval(n, k + 1, self.shift)

    def parent(self) -> "DyadicInterval":
        if self.level == 0:
            raise ValueError("the whole circle has no parent")
        return DyadicInterval(self.level - 1, self.index // 2, self.shift)


def interval_bounds(d: DyadicInterval) -> Arc:
    return Arc(mod1(d.shift.delta + Fraction(d.index, 2 ** d.level)), d.length)


def level_partition(shift: Shift, level: int) -> list[DyadicInterval]:
    return [DyadicInterval(level, k, shift) for k in range(2 ** level)]


def interval_at(t: RatLike, shift: Shift, level: int) -> DyadicInterval:
    """The level-n interval of the shifted system that contains the point t."""
    u = mod1(rat(t) - shift.delta)
    if u == 0:
        u = Fraction(1)
    k = math.ceil(u * 2 ** level) - 1
    return DyadicInterval(level, k, shift)


def chain(t: RatLike, shift: Shift, depth: int) -> Iterator[DyadicInterval]:
    """Intervals containing t at levels 0..depth, coarse to fine."""
    for n in range(depth + 1):
        yield interval_at(t, shift, n)


def containing_interval(arc: Arc, shift: Shift, level: int) -> Optional[DyadicInterval]:
    """The level-n interval containing the whole arc, if there is one."""
    if level == 0:
        return DyadicInterval(0, 0, shift)
    u = mod1(arc.start - shift.delta)
    k = math.floor(u * 2 ** level)
    cand = DyadicInterval(level, k, shift)
    if cand.arc.contains(arc):
        return cand
    return None


@dataclass(frozen=True)
class FitResult:
    filtration: str
    interval: DyadicInterval
    ratio: Fraction


def fit_level(length: Fraction, d: Fraction) -> int:
    """Level n with d/2^(n+1) <= length < d/2^n, or 0 when length >= d."""
    if length >= d:
        return 0
    n = 0
    while length < d / 2 ** (n + 1):
        n += 1
    return n


def fit_interval(arc: Arc, shift: Shift) -> FitResult:
    """Find a base or shifted dyadic interval containing ``arc``.

    Long arcs (length >= d) go to the whole circle.  Otherwise, at the level
    chosen by :func:`fit_level`, the endpoints of the two partitions are
    pairwise more than ``length`` apart, so the arc straddles at most one of
    them and one of the two level-n intervals holding its left end contains it.
    The base system wins ties.
    """
    shift.require_admissible()
    d = shift.distance
    if arc.length >= d:
        whole = DyadicInterval(0, 0, BASE_SHIFT)
        return FitResult(BASE, whole, 1 / arc.length)
    n = fit_level(arc.length, d)
    for name, sh in ((BASE, BASE_SHIFT), (SHIFTED, shift)):
        hit = containing_interval(arc, sh, n)
        if hit is not None:
            return FitResult(name, hit, hit.length / arc.length)
    raise AssertionError(f"no fit for {arc} with shift {shift.delta}: endpoint spacing argument violated")


def disqualified(arc: Arc, shift: Shift, level: int) -> bool:
    """True when some level-n endpoint of ``shift`` lies strictly inside ``arc``."""
    return containing_interval(arc, shift, level) is None
