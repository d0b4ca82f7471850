"""Product filtrations on the torus T^m and level-shifted dyadic systems on R.

On T^m the family delta_0..delta_m gives m+1 product filtrations, each the
m-fold product of one translated circle system.  On R a system keeps the
fine levels (n >= 0) at offset delta and pushes coarse levels by the offsets
(4^j - 1)/3, whose binary expansion ...010101 plays the role of the shift
1/3 across scales.
"""
from __future__ import annotations

import itertools
import math
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, reduce
from operator import mul
from typing import Optional, Sequence

import numpy as np

from .circle import Arc, DyadicInterval, Shift, containing_interval, fit_level, pairwise_distance
from .rational import common_denominator, decimal, fmt, mod1, rat
from .scan import group_exact, normalize_grid


EXACT_FLOAT_LIMIT_MD = 2 ** 53


def _prod(xs):
    return reduce(mul, xs, Fraction(1))


# -- geometry -------------------------------------------------------------------


@dataclass(frozen=True)
class Box:
    """Product of arcs (corner_i, corner_i + sides_i] on the torus."""

    corner: tuple[Fraction, ...]
    sides: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        c = tuple(rat(x) for x in self.corner)
        s = tuple(rat(x) for x in self.sides)
        if len(c) != len(s) or not c:
            raise ValueError("corner and sides must have the same positive length")
        object.__setattr__(self, "corner", c)
        object.__setattr__(self, "sides", s)
        self.axes  # validates every axis arc

    @property
    def dim(self) -> int:
        return len(self.corner)

    @property
    def axes(self) -> tuple[Arc, ...]:
        return tuple(Arc(c, s) for c, s in zip(self.corner, self.sides))

    @property
    def is_cube(self) -> bool:
        return len(set(self.sides)) == 1

    @property
    def volume(self) -> Fraction:
        return _prod(self.sides)

    def contains(self, other: "Box") -> bool:
        return all(a.contains(b) for a, b in zip(self.axes, other.axes))

    def to_json(self) -> dict:
        return {"corner": [fmt(c) for c in self.corner], "sides": [fmt(s) for s in self.sides]}


def cube(corner: Sequence, side) -> Box:
    return Box(tuple(corner), tuple(rat(side) for _ in corner))


@dataclass(frozen=True)
class ShiftFamily:
    deltas: tuple[Fraction, ...]
    distance: Fraction = field(init=False, compare=False)

    def __post_init__(self) -> None:
        ds = tuple(rat(d) for d in self.deltas)
        if any(not 0 <= d < 1 for d in ds):
            raise ValueError("shifts must lie in [0, 1)")
        object.__setattr__(self, "deltas", ds)
        object.__setattr__(self, "distance", pairwise_distance(ds))

    @property
    def admissible(self) -> bool:
        return self.distance > 0

    @property
    def shifts(self) -> tuple[Shift, ...]:
        return tuple(Shift(d) for d in self.deltas)

    @property
    def fit_constant(self) -> Fraction:
        return 2 / self.distance


@dataclass(frozen=True)
class CubeFit:
    index: int
    delta: Fraction
    intervals: tuple[DyadicInterval, ...]
    ratios: tuple[Fraction, ...]
    disqualified: tuple[frozenset[int], ...]

    @property
    def total_ratio(self) -> Fraction:
        return _prod(self.ratios)

    @property
    def box(self) -> Box:
        arcs = [d.arc for d in self.intervals]
        return Box(tuple(a.start for a in arcs), tuple(a.length for a in arcs))


def fit_cube(J: Box, family: ShiftFamily, allow_boxes: bool = False) -> CubeFit:
    """Pick a product filtration whose dyadic box contains J with ratio <= c^m.

    Per axis the level comes from the family distance; the endpoints of all
    m+1 systems at that level are pairwise farther apart than the side, so at
    most one system is disqualified per axis and some system survives all m.
    The smallest surviving index is returned.
    """
    if not family.admissible:
        raise ValueError(f"inadmissible family: pairwise distance is 0 for {[fmt(d) for d in family.deltas]}")
    if len(family.deltas) != J.dim + 1:
        raise ValueError(f"dimension {J.dim} needs {J.dim + 1} shifts, got {len(family.deltas)}")
    if not (J.is_cube or allow_boxes):
        raise ValueError("fit_cube certifies cubes; pass allow_boxes=True for general boxes")
    d = family.distance
    shifts = family.shifts
    levels = [fit_level(a.length, d) for a in J.axes]
    found: list[list[Optional[DyadicInterval]]] = []
    disq = []
    for axis, n in zip(J.axes, levels):
        row = [containing_interval(axis, sh, n) for sh in shifts]
        found.append(row)
        disq.append(frozenset(i for i, hit in enumerate(row) if hit is None))
    for i in range(len(shifts)):
        if all(i not in dq for dq in disq):
            ivs = tuple(row[i] for row in found)
            ratios = tuple(iv.length / a.length for iv, a in zip(ivs, J.axes))
            return CubeFit(i, family.deltas[i], ivs, ratios, tuple(disq))
    raise AssertionError(f"pigeonhole failed for {J}: disqualified per axis {disq}")


# -- functions on the torus ---------------------------------------------------------


class _Axis:
    """Cyclic breakpoints of one axis with its linear segment structure."""

    def __init__(self, breakpoints: Sequence[Fraction]):
        self.breakpoints = tuple(breakpoints)
        n = len(self.breakpoints)
        xs = [Fraction(0)] + [b for b in self.breakpoints if b > 0] + [Fraction(1)]
        self.xs = xs
        self.piece = [(bisect_right(self.breakpoints, x) - 1) % n for x in xs[:-1]]

    def piece_index(self, t: Fraction) -> int:
        from bisect import bisect_left

        return (bisect_left(self.breakpoints, mod1(t)) - 1) % len(self.breakpoints)

    def overlaps(self, arc: Arc) -> list[tuple[Fraction, int]]:
        xs = self.xs
        spans = [(arc.start, arc.end)] if not arc.wraps else [(arc.start, Fraction(1)), (Fraction(0), arc.end - 1)]
        out = []
        for lo, hi in spans:
            j = max(bisect_right(xs, lo) - 1, 0)
            while j < len(self.piece) and xs[j] < hi:
                ov = min(hi, xs[j + 1]) - max(lo, xs[j])
                if ov > 0:
                    out.append((ov, self.piece[j]))
                j += 1
        return out


class GridFn:
    """Tensor-product step function: ``values[i0, ..., i_{m-1}]`` on the product
    of axis pieces (b_i, b_{i+1}] (cyclic per axis)."""

    def __init__(self, breakpoints: Sequence[Sequence], values):
        bps = [sorted(rat(b) for b in axis) for axis in breakpoints]
        vals = np.array(values, dtype=object)
        if vals.ndim != len(bps):
            vals = vals.reshape(tuple(len(b) for b in bps))
        if vals.shape != tuple(len(b) for b in bps):
            raise ValueError(f"value tensor shape {vals.shape} does not match breakpoints")
        for axis in bps:
            if not axis or any(not 0 <= b < 1 for b in axis) or len(set(axis)) != len(axis):
                raise ValueError("each axis needs distinct breakpoints in [0, 1)")
        self.breakpoints = tuple(tuple(b) for b in bps)
        self.values = np.vectorize(rat, otypes=[object])(vals)
        self.axes = [_Axis(b) for b in self.breakpoints]

    @property
    def dim(self) -> int:
        return len(self.breakpoints)

    @classmethod
    def product(cls, *factors) -> "GridFn":
        """Separable function x -> prod f_i(x_i) of circle StepFns."""
        vals = np.array([1], dtype=object)
        for f in factors:
            vals = np.multiply.outer(vals, np.array(f.values, dtype=object))
        return cls([f.breakpoints for f in factors], vals.reshape(tuple(len(f) for f in factors)))

    @classmethod
    def extend(cls, f, axis: int, dim: int) -> "GridFn":
        """A circle StepFn viewed as a function of coordinate ``axis`` only."""
        bps = [(Fraction(0),)] * dim
        bps[axis] = f.breakpoints
        shape = [1] * dim
        shape[axis] = len(f)
        return cls(bps, np.array(f.values, dtype=object).reshape(shape))

    @classmethod
    def from_json(cls, obj: dict) -> "GridFn":
        bps = [[rat(b) for b in axis] for axis in obj["breakpoints"]]
        flat = obj["values"]
        if flat and not isinstance(flat[0], list):
            return cls(bps, np.array([rat(v) for v in flat], dtype=object).reshape(tuple(len(b) for b in bps)))
        return cls(bps, np.vectorize(rat, otypes=[object])(np.array(flat, dtype=object)))

    def to_json(self) -> dict:
        return {"breakpoints": [[fmt(b) for b in axis] for axis in self.breakpoints],
                "values": [fmt(v) for v in self.values.ravel()]}

    def __call__(self, *point) -> Fraction:
        return self.values[tuple(ax.piece_index(rat(p)) for ax, p in zip(self.axes, point))]

    def _cells(self, box: Box):
        per_axis = [ax.overlaps(a) for ax, a in zip(self.axes, box.axes)]
        for combo in itertools.product(*per_axis):
            yield _prod(c[0] for c in combo), self.values[tuple(c[1] for c in combo)]

    def integral(self, box: Box) -> Fraction:
        return sum((w * v for w, v in self._cells(box)), Fraction(0))

    def average(self, box: Box) -> Fraction:
        return self.integral(box) / box.volume

    def mean_oscillation(self, box: Box) -> Fraction:
        cells = list(self._cells(box))
        m = sum((w * v for w, v in cells), Fraction(0)) / box.volume
        return sum((w * abs(v - m) for w, v in cells), Fraction(0)) / box.volume


# -- dyadic norm on the torus -----------------------------------------------------------


def _axis_candidates(axis: _Axis, shift: Shift, level: int) -> tuple[list[int], list[int]]:
    """(straddling indices, one representative index per piece holding a full interval)."""
    scale = 2 ** level
    strad, near = set(), set()
    for b in axis.breakpoints:
        x = mod1(b - shift.delta) * scale
        k = math.floor(x)
        if x.denominator != 1:
            strad.add(k % scale)
        near.add(k % scale)
        near.add((k + 1) % scale)
    if level == 0 and len(axis.breakpoints) > 1:
        strad.add(0)
    reps: dict[int, int] = {}
    for k in sorted(near - strad):
        iv = DyadicInterval(level, k, shift).arc
        p = axis.piece_index(iv.end)
        reps.setdefault(p, k)
    if level == 0 and not strad:
        reps = {0: 0}
    return sorted(strad), sorted(reps.values())


@dataclass(frozen=True)
class DyadicNormMD:
    value: Fraction
    exact: bool
    level: int
    indices: tuple[int, ...]
    box: Box
    depth: int


def dyadic_bmo_norm_md(fn: GridFn, delta, max_depth: int) -> DyadicNormMD:
    """Max mean oscillation over equal-level product dyadic cubes of the system
    translated by (delta, ..., delta), levels 0..max_depth.

    A cube whose every axis interval avoids breakpoints is a constant cube.
    When only some axes avoid them, the oscillation depends on those axes only
    through the piece they sit in, so one representative per piece suffices.
    """
    if max_depth < 0:
        raise ValueError("max_depth must be >= 0")
    shift = Shift(rat(delta))
    best = (Fraction(0), 0, (0,) * fn.dim)
    for n in range(max_depth + 1):
        cands = [_axis_candidates(ax, shift, n) for ax in fn.axes]
        pools = [sorted(set(s) | set(r)) for s, r in cands]
        strad = [set(s) for s, _ in cands]
        for ks in itertools.product(*pools):
            if not any(k in s for k, s in zip(ks, strad)):
                continue
            box = _dyadic_box(shift, n, ks)
            v = fn.mean_oscillation(box)
            if v > best[0]:
                best = (v, n, ks)
    scale = 2 ** max_depth
    exact = all((mod1(b - shift.delta) * scale).denominator == 1 for ax in fn.axes for b in ax.breakpoints)
    v, n, ks = best
    return DyadicNormMD(v, exact, n, ks, _dyadic_box(shift, n, ks), max_depth)


def _dyadic_box(shift: Shift, level: int, ks: Sequence[int]) -> Box:
    arcs = [DyadicInterval(level, k, shift).arc for k in ks]
    return Box(tuple(a.start for a in arcs), tuple(a.length for a in arcs))


# -- classical lower bound on T^2 --------------------------------------------------------


class CubeScan:
    """All squares with corner on grid0 x grid1 and side from ``sides``."""

    def __init__(self, fn: GridFn, grids: Sequence[Sequence], sides: Optional[Sequence] = None):
        if fn.dim != 2:
            raise ValueError("the cube scan is implemented for dimension 2")
        self.fn = fn
        self.grids = [normalize_grid(g) for g in grids]
        if sides is None:
            sides = cube_sides(self.grids)
        self.sides = sorted({rat(s) for s in sides})
        if any(not 0 < s <= 1 for s in self.sides):
            raise ValueError("sides must lie in (0, 1]")
        pts = [p for g in self.grids for p in g] + list(self.sides)
        pts += [b for ax in fn.breakpoints for b in ax]
        self.Q = common_denominator(pts)
        self.V = common_denominator(fn.values.ravel())
        w_max = max(abs(v) for v in fn.values.ravel()) * self.V
        self.fits = 2 * self.Q ** 4 * (w_max + 1) < EXACT_FLOAT_LIMIT_MD

    def _axis_arrays(self, ax: _Axis):
        q = self.Q
        xi = [int(x * q) for x in ax.xs]
        xs2 = np.array(xi + [x + q for x in xi[1:]], dtype=np.int64)
        return xs2, ax.piece + ax.piece

    @cached_property
    def deviation(self) -> np.ndarray:
        from ._kernels import cube_deviation_tensor

        (x0, p0), (x1, p1) = (self._axis_arrays(ax) for ax in self.fn.axes)
        w = np.empty((len(p0), len(p1)), dtype=np.int64)
        for a, pa in enumerate(p0):
            for b, pb in enumerate(p1):
                w[a, b] = int(self.fn.values[pa, pb] * self.V)
        g0 = np.array([int(g * self.Q) for g in self.grids[0]], dtype=np.int64)
        g1 = np.array([int(g * self.Q) for g in self.grids[1]], dtype=np.int64)
        sides = np.array([int(s * self.Q) for s in self.sides], dtype=np.int64)
        return cube_deviation_tensor(x0, x1, w, g0, g1, sides)

    def box(self, i: int, j: int, k: int) -> Box:
        return cube((self.grids[0][i], self.grids[1][j]), self.sides[k])

    def max_oscillation(self) -> tuple[Fraction, Box]:
        if not self.fits:
            return self._max_python()
        dev = self.deviation
        sides = np.array([int(s * self.Q) for s in self.sides], dtype=np.int64)
        vol2 = (sides ** 4)[None, None, :]
        ratio = dev.astype(np.float64) / vol2.astype(np.float64)
        top = ratio.max()
        mask = ratio == top
        den = np.broadcast_to(vol2, dev.shape)[mask]
        exact = group_exact(ratio[mask], dev[mask], den, self.V)[float(top)]
        idx = tuple(int(x[0]) for x in np.nonzero(mask))
        if exact is None:
            best = max((self.fn.mean_oscillation(self.box(*ix)), ix) for ix in zip(*(a.tolist() for a in np.nonzero(mask))))
            return best[0], self.box(*best[1])
        return exact, self.box(*idx)

    def _max_python(self) -> tuple[Fraction, Box]:
        best = None
        for i, j, k in itertools.product(range(len(self.grids[0])), range(len(self.grids[1])), range(len(self.sides))):
            b = self.box(i, j, k)
            v = self.fn.mean_oscillation(b)
            if best is None or v > best[0]:
                best = (v, b)
        return best


def cube_sides(grids: Sequence[Sequence[Fraction]]) -> list[Fraction]:
    """Every positive gap (mod 1) between two points of one axis grid, plus 1."""
    out = {Fraction(1)}
    for g in grids:
        for a in g:
            for b in g:
                if a != b:
                    out.add(mod1(b - a))
    return sorted(out)


def classical_lower_md(fn: GridFn, grids: Sequence[Sequence], sides: Optional[Sequence] = None,
                       method: str = "auto") -> tuple[Fraction, Box]:
    scan = CubeScan(fn, grids, sides)
    if method == "python":
        return scan._max_python()
    return scan.max_oscillation()


@dataclass
class CubeTrace:
    cube: Box
    fit: CubeFit
    osc_cube: Fraction
    osc_dyadic: Fraction
    norm: Fraction
    norm_depth: int
    constant: Fraction

    @property
    def steps(self) -> tuple[bool, bool, bool]:
        mid = 2 * self.fit.total_ratio * self.osc_dyadic
        return (self.osc_cube <= mid, mid <= self.constant * self.osc_dyadic, self.osc_dyadic <= self.norm)

    @property
    def holds(self) -> bool:
        return all(self.steps)


@dataclass
class MDReport:
    deltas: tuple[Fraction, ...]
    distance: Fraction
    constant: Fraction
    classical_lower: Fraction
    witness: Box
    dyadic_norms: tuple[Fraction, ...]
    bound: Fraction
    margin: Fraction
    trivial_direction: Optional[bool]
    trace: CubeTrace
    depth: int

    @property
    def holds(self) -> bool:
        return self.margin >= 0 and self.trivial_direction is not False and self.trace.holds

    def to_json(self) -> dict:
        return {
            "deltas": [fmt(d) for d in self.deltas],
            "distance": fmt(self.distance),
            "bound_constant": fmt(self.constant),
            "classical_lower": fmt(self.classical_lower),
            "witness": self.witness.to_json(),
            "dyadic_norms": [fmt(v) for v in self.dyadic_norms],
            "bound": fmt(self.bound),
            "margin": fmt(self.margin),
            "margin_decimal": decimal(self.margin),
            "trivial_direction": self.trivial_direction,
            "trace_steps": list(self.trace.steps),
            "trace_index": self.trace.fit.index,
            "depth": self.depth,
            "holds": self.holds,
        }


def md_grids(fn: GridFn, family: ShiftFamily, depth: int) -> list[list[Fraction]]:
    out = []
    for ax in fn.axes:
        pts = set(ax.breakpoints)
        for d in family.deltas:
            pts.update(mod1(d + Fraction(k, 2 ** depth)) for k in range(2 ** depth))
        out.append(sorted(pts))
    return out


def verify_equivalence_md(fn: GridFn, family: ShiftFamily, depth: int,
                          grids: Optional[Sequence[Sequence]] = None) -> MDReport:
    """Classical cube lower bound against 2 (2/d)^m times the largest of the m+1
    dyadic norms, with the proof chain replayed on the witness cube."""
    if not family.admissible:
        raise ValueError("inadmissible family: pairwise distance is 0")
    m = fn.dim
    if len(family.deltas) != m + 1:
        raise ValueError(f"dimension {m} needs {m + 1} shifts")
    if grids is None:
        grids = md_grids(fn, family, depth)
    grids = [normalize_grid(g) for g in grids]
    classical, witness = classical_lower_md(fn, grids)
    norms = [dyadic_bmo_norm_md(fn, d, depth) for d in family.deltas]
    const = 2 * family.fit_constant ** m
    bound = const * max(n.value for n in norms)
    dy = [set(mod1(d + Fraction(k, 2 ** depth)) for k in range(2 ** depth)) for d in family.deltas]
    refines = all(p <= set(g) for p in dy for g in grids)
    trivial = all(n.value <= classical for n in norms) if refines else None
    fit = fit_cube(witness, family)
    lvl = max(iv.level for iv in fit.intervals)
    deep = dyadic_bmo_norm_md(fn, fit.delta, max(depth, lvl)).value
    trace = CubeTrace(witness, fit, fn.mean_oscillation(witness), fn.mean_oscillation(fit.box), deep,
                      max(depth, lvl), const)
    return MDReport(family.deltas, family.distance, const, classical, witness, tuple(n.value for n in norms),
                    bound, bound - classical, trivial, trace, depth)


# -- the real line -------------------------------------------------------------------------


class NestingError(RuntimeError):
    pass


def coarse_offset(n: int) -> Fraction:
    """Extra offset of level n: 0 for n >= 0, (4^ceil(-n/2) - 1)/3 below.

    Odd negative levels share the offset of the next coarser even level.
    """
    if n >= 0:
        return Fraction(0)
    j = -((n) // 2)  # ceil(-n/2)
    return Fraction(4 ** j - 1, 3)


def all_j_offset(n: int) -> Fraction:
    """Sum of 2^-j over every integer j in [n+2, 0]; kept for auditing nesting."""
    if n >= 0:
        return Fraction(0)
    return sum((Fraction(1, 2) ** j for j in range(n + 2, 1)), Fraction(0))


def nests(offsets: dict[int, Fraction], n: int) -> bool:
    """Level-n endpoints are level-(n+1) endpoints: s_n - s_{n+1} in 2^-(n+1) Z."""
    diff = (offsets[n] - offsets[n + 1]) * Fraction(2) ** (n + 1)
    return diff.denominator == 1


@dataclass(frozen=True)
class RLevelSystem:
    delta: Fraction
    n_min: int
    n_max: int
    offsets: tuple[tuple[int, Fraction], ...]

    @cached_property
    def _table(self) -> dict[int, Fraction]:
        return dict(self.offsets)

    def offset(self, n: int) -> Fraction:
        if not self.n_min <= n <= self.n_max:
            raise ValueError(f"level {n} outside [{self.n_min}, {self.n_max}]")
        return self._table[n]

    def spacing(self, n: int) -> Fraction:
        return Fraction(2) ** (-n)

    def interval(self, n: int, k: int) -> tuple[Fraction, Fraction]:
        h, s = self.spacing(n), self.offset(n)
        return k * h + s, (k + 1) * h + s

    def index_at(self, x, n: int) -> int:
        """k with x in (k h + s, (k+1) h + s]."""
        u = (rat(x) - self.offset(n)) / self.spacing(n)
        return math.ceil(u) - 1

    def containing(self, a: Fraction, b: Fraction, n: int) -> Optional[int]:
        h, s = self.spacing(n), self.offset(n)
        k = math.floor((a - s) / h)
        if b <= (k + 1) * h + s:
            return k
        return None

    def to_json(self) -> dict:
        return {"delta": fmt(self.delta), "n_min": self.n_min, "n_max": self.n_max,
                "offsets": {str(n): fmt(s) for n, s in self.offsets}}


def build_r_filtration(delta, n_min: int, n_max: int) -> RLevelSystem:
    delta = rat(delta)
    if n_min > 0 or n_max < 0 or n_min > n_max:
        raise ValueError("need n_min <= 0 <= n_max")
    Shift(delta).require_admissible()
    offs = {n: delta + coarse_offset(n) for n in range(n_min, n_max + 1)}
    for n in range(n_min, n_max):
        if not nests(offs, n):
            raise NestingError(f"levels {n} and {n + 1} do not nest: s_n - s_(n+1) = {offs[n] - offs[n + 1]}")
    return RLevelSystem(delta, n_min, n_max, tuple(sorted(offs.items())))


def standard_r_filtration(n_min: int, n_max: int) -> RLevelSystem:
    """The unshifted dyadic intervals (k 2^-n, (k+1) 2^-n] of R at every level."""
    if n_min > 0 or n_max < 0 or n_min > n_max:
        raise ValueError("need n_min <= 0 <= n_max")
    return RLevelSystem(Fraction(0), n_min, n_max, tuple((n, Fraction(0)) for n in range(n_min, n_max + 1)))


@dataclass(frozen=True)
class RFit:
    ok: bool
    interval: tuple[Fraction, Fraction]
    bound: Fraction
    system: Optional[int] = None
    level: Optional[int] = None
    index: Optional[int] = None
    ratio: Optional[Fraction] = None
    note: str = ""

    def to_json(self) -> dict:
        out = {"ok": self.ok, "interval": [fmt(x) for x in self.interval], "bound": fmt(self.bound), "note": self.note}
        if self.system is not None:
            out.update(system=self.system, level=self.level, index=self.index, ratio=fmt(self.ratio),
                       ratio_decimal=decimal(self.ratio))
        return out


def fit_interval_r(a, b, systems: Sequence[RLevelSystem]) -> RFit:
    """Finest level (any system, smallest index first) whose interval contains (a, b].

    ``ok`` is set when the ratio is within 4/d of the family.  Otherwise the
    result is a certificate carrying the best fit available in the level range
    (or none at all).
    """
    a, b = rat(a), rat(b)
    if not a < b:
        raise ValueError("need a < b")
    if len(systems) < 2:
        raise ValueError("need at least two systems")
    d = pairwise_distance([s.delta for s in systems])
    if d == 0:
        raise ValueError("inadmissible family: pairwise distance is 0")
    bound = 4 / d
    length = b - a
    n_hi = min(min(s.n_max for s in systems), math.floor(-math.log2(length)) + 1)
    n_lo = max(s.n_min for s in systems)
    if n_hi < n_lo:
        return RFit(False, (a, b), bound, note="interval longer than the coarsest level")
    for n in range(n_hi, n_lo - 1, -1):
        h = Fraction(2) ** (-n)
        if h < length:
            continue
        for i, s in enumerate(systems):
            k = s.containing(a, b, n)
            if k is not None:
                ratio = h / length
                return RFit(ratio <= bound, (a, b), bound, i, n, k, ratio,
                            "" if ratio <= bound else "fit exceeds 4/d")
    return RFit(False, (a, b), bound, note="no level in range contains the interval")
