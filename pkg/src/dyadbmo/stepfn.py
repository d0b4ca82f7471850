"""Exact piecewise-constant functions on the circle."""
from __future__ import annotations

from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import accumulate
from typing import Iterable, Sequence

from .circle import Arc
from .rational import RatLike, fmt, mod1, rat


@dataclass(frozen=True)
class StepFn:
    """Piece ``i`` is the arc (breakpoints[i], breakpoints[i+1]] read cyclically.

    The constructor sorts, checks and canonicalizes: neighbouring pieces with
    equal values are merged, and a constant function is stored as a single
    piece starting at 0.
    """

    breakpoints: tuple[Fraction, ...]
    values: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        bps = [rat(b) for b in self.breakpoints]
        vals = [rat(v) for v in self.values]
        if len(bps) != len(vals) or not bps:
            raise ValueError("breakpoints and values must be non-empty and of equal length")
        if any(not 0 <= b < 1 for b in bps):
            raise ValueError("breakpoints must lie in [0, 1)")
        pairs = sorted(zip(bps, vals))
        if any(pairs[i][0] == pairs[i + 1][0] for i in range(len(pairs) - 1)):
            raise ValueError("breakpoints must be distinct")
        keep = [p for i, p in enumerate(pairs) if p[1] != pairs[i - 1][1]]
        if not keep:
            keep = [(Fraction(0), pairs[0][1])]
        object.__setattr__(self, "breakpoints", tuple(b for b, _ in keep))
        object.__setattr__(self, "values", tuple(v for _, v in keep))

    @classmethod
    def constant(cls, c: RatLike) -> "StepFn":
        return cls((Fraction(0),), (rat(c),))

    @classmethod
    def indicator(cls, arc: Arc, height: RatLike = 1) -> "StepFn":
        return cls.from_arc_pieces(arc, [arc.length], [height])

    @classmethod
    def from_arc_pieces(cls, arc: Arc, cuts: Sequence[RatLike], values: Sequence[RatLike]) -> "StepFn":
        """Function equal to values[j] on (start + cuts[j-1], start + cuts[j]] and 0 off ``arc``.

        ``cuts`` are increasing offsets ending at ``arc.length`` (the first
        cut offset 0 is implicit).
        """
        cuts = [rat(c) for c in cuts]
        if len(cuts) != len(values) or not cuts or cuts[-1] != arc.length:
            raise ValueError("cuts must end at the arc length and match values")
        offsets = [Fraction(0)] + cuts[:-1]
        if any(b <= a for a, b in zip(offsets, cuts)):
            raise ValueError("cuts must be strictly increasing")
        bps = [mod1(arc.start + o) for o in offsets]
        vals = [rat(v) for v in values]
        if not arc.is_full:
            bps.append(mod1(arc.end))
            vals.append(Fraction(0))
        return cls(tuple(bps), tuple(vals))

    @classmethod
    def from_json(cls, obj: dict) -> "StepFn":
        return cls(tuple(rat(b) for b in obj["breakpoints"]), tuple(rat(v) for v in obj["values"]))

    def to_json(self) -> dict:
        return {"breakpoints": [fmt(b) for b in self.breakpoints], "values": [fmt(v) for v in self.values]}

    # -- structure ---------------------------------------------------------

    def __len__(self) -> int:
        return len(self.breakpoints)

    @property
    def is_constant(self) -> bool:
        return len(self.values) == 1

    def piece_arcs(self) -> list[tuple[Arc, Fraction]]:
        n = len(self.breakpoints)
        out = []
        for i, (b, v) in enumerate(zip(self.breakpoints, self.values)):
            nxt = self.breakpoints[(i + 1) % n] + (1 if i + 1 >= n else 0)
            out.append((Arc(b, nxt - b), v))
        return out

    def piece_index(self, t: RatLike) -> int:
        """Index of the piece containing the point t."""
        i = bisect_left(self.breakpoints, mod1(rat(t))) - 1
        return i % len(self.breakpoints)

    def __call__(self, t: RatLike) -> Fraction:
        return self.values[self.piece_index(t)]

    def right_value(self, t: RatLike) -> Fraction:
        """Value just to the right of t (on (t, t + eps])."""
        i = bisect_right(self.breakpoints, mod1(rat(t))) - 1
        return self.values[i % len(self.breakpoints)]

    @property
    def sup(self) -> Fraction:
        return max(self.values)

    @property
    def inf(self) -> Fraction:
        return min(self.values)

    @property
    def sup_abs(self) -> Fraction:
        return max(abs(v) for v in self.values)

    # -- linearized form on [0, 1] ------------------------------------------

    @cached_property
    def _segments(self) -> tuple[list[Fraction], list[Fraction], list[Fraction]]:
        # points 0 = x_0 < ... < x_r = 1, value on (x_j, x_{j+1}], prefix integrals
        xs = [Fraction(0)] + [b for b in self.breakpoints if b > 0] + [Fraction(1)]
        vals = [self.right_value(x) for x in xs[:-1]]
        prefix = [Fraction(0)] + list(accumulate((xs[j + 1] - xs[j]) * vals[j] for j in range(len(vals))))
        return xs, vals, prefix

    @property
    def total(self) -> Fraction:
        """Integral over the whole circle (normalized measure)."""
        return self._segments[2][-1]

    def _F(self, x: Fraction) -> Fraction:
        # integral from 0 to x, extended so F(x + 1) = F(x) + total
        xs, vals, prefix = self._segments
        whole = x.numerator // x.denominator
        r = x - whole
        j = bisect_right(xs, r) - 1
        if j >= len(vals):
            j = len(vals) - 1
        return whole * prefix[-1] + prefix[j] + (r - xs[j]) * vals[j]

    def integral(self, arc: Arc) -> Fraction:
        return self._F(arc.end) - self._F(arc.start)

    def overlaps(self, arc: Arc) -> list[tuple[Fraction, Fraction]]:
        """(overlap length, value) for every linear segment meeting ``arc``."""
        xs, vals, _ = self._segments
        spans = [(arc.start, arc.end)] if not arc.wraps else [(arc.start, Fraction(1)), (Fraction(0), arc.end - 1)]
        out = []
        for lo, hi in spans:
            j = max(bisect_right(xs, lo) - 1, 0)
            while j < len(vals) and xs[j] < hi:
                ov = min(hi, xs[j + 1]) - max(lo, xs[j])
                if ov > 0:
                    out.append((ov, vals[j]))
                j += 1
        return out

    # -- algebra -------------------------------------------------------------

    def map_values(self, f) -> "StepFn":
        return StepFn(self.breakpoints, tuple(f(v) for v in self.values))

    def __neg__(self) -> "StepFn":
        return self.map_values(lambda v: -v)

    def __abs__(self) -> "StepFn":
        return self.map_values(abs)

    def scale(self, c: RatLike) -> "StepFn":
        c = rat(c)
        return self.map_values(lambda v: c * v)

    def shift_values(self, c: RatLike) -> "StepFn":
        c = rat(c)
        return self.map_values(lambda v: v + c)

    def translate(self, s: RatLike) -> "StepFn":
        """The function t -> self(t - s)."""
        s = rat(s)
        return StepFn(tuple(mod1(b + s) for b in self.breakpoints), self.values)

    def __add__(self, other: "StepFn") -> "StepFn":
        pts = sorted(set(self.breakpoints) | set(other.breakpoints))
        return StepFn(tuple(pts), tuple(self.right_value(p) + other.right_value(p) for p in pts))

    def __sub__(self, other: "StepFn") -> "StepFn":
        return self + (-other)

    def __mul__(self, c: RatLike) -> "StepFn":
        return self.scale(c)

    __rmul__ = __mul__


def zero() -> StepFn:
    return StepFn.constant(0)


def step_sum(fns: Iterable[StepFn]) -> StepFn:
    acc = zero()
    for f in fns:
        acc = acc + f
    return acc
