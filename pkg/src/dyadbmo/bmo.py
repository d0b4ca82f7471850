"""Mean oscillation, classical and translated-dyadic BMO norms on the circle.

Dyadic norms are exact suprema over levels 0..N.  The classical norm is a
supremum over every arc and is not computable; ``classical_bmo_lower_bound``
returns the exact maximum over arcs with endpoints on a given grid, which is
a certified lower bound.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .circle import (
    BASE,
    BASE_SHIFT,
    SHIFTED,
    Arc,
    DyadicInterval,
    Shift,
    fit_interval,
    fit_level,
)
from .rational import decimal, fmt, mod1, rat
from .scan import ArcScan, normalize_grid
from .stepfn import StepFn

FULL = Arc(Fraction(0), Fraction(1))


def average(fn: StepFn, arc: Arc) -> Fraction:
    return fn.integral(arc) / arc.length


def mean_oscillation(fn: StepFn, arc: Arc) -> Fraction:
    m = average(fn, arc)
    return sum((ln * abs(v - m) for ln, v in fn.overlaps(arc)), Fraction(0)) / arc.length


@dataclass(frozen=True)
class OscWitness:
    arc: Arc
    oscillation: Fraction
    mean: Fraction

    @classmethod
    def of(cls, fn: StepFn, arc: Arc) -> "OscWitness":
        return cls(arc, mean_oscillation(fn, arc), average(fn, arc))

    def to_json(self) -> dict:
        return {
            "arc": {"start": fmt(self.arc.start), "length": fmt(self.arc.length)},
            "oscillation": fmt(self.oscillation),
            "oscillation_decimal": decimal(self.oscillation),
            "mean": fmt(self.mean),
        }


@dataclass(frozen=True)
class DyadicNorm:
    value: Fraction
    exact: bool
    witness: OscWitness
    interval: DyadicInterval
    depth: int


def dyadic_grid(shift: Shift, depth: int) -> list[Fraction]:
    """Endpoints of the level-``depth`` partition of ``shift``."""
    return [mod1(shift.delta + Fraction(k, 2 ** depth)) for k in range(2 ** depth)]


def _relative_positions(fn: StepFn, shift: Shift) -> list[Fraction]:
    return [mod1(b - shift.delta) for b in fn.breakpoints]


def straddled(fn: StepFn, shift: Shift, level: int) -> list[int]:
    """Indices of level-n intervals with a breakpoint strictly inside.

    Every other interval of that level lies inside a single piece, so
    ``fn`` is constant there and its oscillation vanishes.
    """
    if fn.is_constant:
        return []
    scale = 2 ** level
    ks = set()
    for u in _relative_positions(fn, shift):
        x = u * scale
        if x.denominator != 1:
            ks.add(math.floor(x))
    if level == 0:
        ks.add(0)
    return sorted(ks)


def dyadic_bmo_norm(fn: StepFn, shift: Shift, max_depth: int) -> DyadicNorm:
    """max of mean oscillation over the intervals of ``shift`` at levels 0..max_depth.

    ``exact`` is set when every breakpoint sits on the level-max_depth grid of
    the shift, so no deeper interval straddles a jump and the truncated value
    is the full dyadic norm.
    """
    if max_depth < 0:
        raise ValueError("max_depth must be >= 0")
    best_v = Fraction(0)
    best_d = DyadicInterval(0, 0, shift)
    for n in range(max_depth + 1):
        for k in straddled(fn, shift, n):
            d = DyadicInterval(n, k, shift)
            v = mean_oscillation(fn, d.arc)
            if v > best_v:
                best_v, best_d = v, d
    scale = 2 ** max_depth
    exact = all((u * scale).denominator == 1 for u in _relative_positions(fn, shift)) or fn.is_constant
    return DyadicNorm(best_v, exact, OscWitness.of(fn, best_d.arc), best_d, max_depth)


def classical_bmo_lower_bound(fn: StepFn, grid: Sequence, method: str = "auto",
                              scan: Optional[ArcScan] = None) -> tuple[Fraction, OscWitness]:
    """Exact max of mean oscillation over arcs with both endpoints on ``grid``."""
    if scan is None:
        scan = ArcScan(fn, grid, method=method)
    res = scan.max_oscillation()
    return res.value, OscWitness.of(fn, res.arc)


def harness_grid(fn: StepFn, shifts: Iterable[Shift], depth: int) -> list[Fraction]:
    pts = set(fn.breakpoints)
    for sh in shifts:
        pts.update(dyadic_grid(sh, depth))
    return sorted(pts)


# -- pointwise operators ----------------------------------------------------


class DyadicChains:
    """Memoized chain quantities of one function in one shifted system.

    Intervals without a breakpoint inside have zero oscillation and
    ``|fn(t)|`` as average of ``|fn|``; only straddling intervals are computed.
    """

    def __init__(self, fn: StepFn, shift: Shift):
        self.fn = fn
        self.abs_fn = abs(fn)
        self.shift = shift
        self._cache: dict[tuple[int, int], tuple[Fraction, Fraction]] = {}
        self._straddled: dict[int, frozenset[int]] = {}

    def _level(self, n: int) -> frozenset[int]:
        if n not in self._straddled:
            self._straddled[n] = frozenset(straddled(self.fn, self.shift, n))
        return self._straddled[n]

    def profile(self, t, depth: int) -> tuple[Fraction, Fraction]:
        """(dyadic sharp, dyadic maximal) at t over levels 0..depth."""
        t = rat(t)
        u = mod1(t - self.shift.delta) or Fraction(1)
        a, b = u.numerator, u.denominator
        sharp = Fraction(0)
        maximal = Fraction(0)
        for n in range(depth + 1):
            k = -((-a << n) // b) - 1
            if k not in self._level(n):
                # this interval sits inside one piece and so do all deeper ones
                maximal = max(maximal, abs(self.fn(t)))
                break
            key = (n, k)
            if key not in self._cache:
                arc = DyadicInterval(n, k, self.shift).arc
                self._cache[key] = (mean_oscillation(self.fn, arc), average(self.abs_fn, arc))
            osc, avg = self._cache[key]
            if osc > sharp:
                sharp = osc
            if avg > maximal:
                maximal = avg
        return sharp, maximal

    def sharp(self, t, depth: int) -> Fraction:
        return self.profile(t, depth)[0]

    def maximal(self, t, depth: int) -> Fraction:
        return self.profile(t, depth)[1]


def dyadic_sharp_function(fn: StepFn, t, shift: Shift, depth: int) -> Fraction:
    _check_point(t)
    return DyadicChains(fn, shift).sharp(t, depth)


def dyadic_maximal(fn: StepFn, t, shift: Shift, depth: int) -> Fraction:
    _check_point(t)
    return DyadicChains(fn, shift).maximal(t, depth)


def sharp_function(fn: StepFn, t, grid: Sequence) -> Fraction:
    """Max mean oscillation over grid arcs containing t (a lower bound of the sharp function)."""
    _check_point(t)
    return ArcScan(fn, grid).oscillation_at(t).value


def hl_maximal_lower(fn: StepFn, t, grid: Sequence) -> Fraction:
    """Max average of |fn| over grid arcs containing t."""
    _check_point(t)
    return ArcScan(fn, grid).maximal_at(t).value


def _check_point(t) -> None:
    t = rat(t)
    if not 0 <= t < 1:
        raise ValueError(f"point must lie in [0, 1), got {t}")


# -- the two-filtration inequality ----------------------------------------------


@dataclass(frozen=True)
class ProofTrace:
    """Replay of the chain osc(I) <= 2 ratio osc(D) <= (4/d) osc(D) <= (4/d) norm."""

    arc: Arc
    filtration: str
    interval: DyadicInterval
    ratio: Fraction
    osc_arc: Fraction
    osc_interval: Fraction
    norm: Fraction
    norm_depth: int
    constant: Fraction

    @property
    def steps(self) -> tuple[bool, bool, bool]:
        mid = 2 * self.ratio * self.osc_interval
        return (
            self.osc_arc <= mid,
            mid <= self.constant * self.osc_interval,
            self.constant * self.osc_interval <= self.constant * self.norm,
        )

    @property
    def holds(self) -> bool:
        return all(self.steps)

    def to_json(self) -> dict:
        return {
            "arc": {"start": fmt(self.arc.start), "length": fmt(self.arc.length)},
            "filtration": self.filtration,
            "interval": {"level": self.interval.level, "index": self.interval.index},
            "ratio": fmt(self.ratio),
            "osc_arc": fmt(self.osc_arc),
            "osc_interval": fmt(self.osc_interval),
            "norm": fmt(self.norm),
            "norm_depth": self.norm_depth,
            "steps": list(self.steps),
        }


def proof_trace(fn: StepFn, arc: Arc, shift: Shift, depth: int) -> ProofTrace:
    fit = fit_interval(arc, shift)
    d = fit.interval
    nd = max(depth, d.level)
    norm = dyadic_bmo_norm(fn, d.shift, nd).value
    return ProofTrace(
        arc=arc,
        filtration=fit.filtration,
        interval=d,
        ratio=fit.ratio,
        osc_arc=mean_oscillation(fn, arc),
        osc_interval=mean_oscillation(fn, d.arc),
        norm=norm,
        norm_depth=nd,
        constant=4 / shift.distance,
    )


@dataclass
class EquivalenceReport:
    delta: Fraction
    d_delta: Fraction
    constant: Fraction
    classical_lower: Fraction
    dyadic_norm_base: Fraction
    dyadic_norm_shifted: Fraction
    bound: Fraction
    margin: Fraction
    witnesses: dict[str, OscWitness]
    depth_used: int
    exact: dict[str, bool]
    grid_refines: bool
    trivial_direction: Optional[bool]
    traces: list[ProofTrace] = field(default_factory=list)

    @property
    def theorem_holds(self) -> bool:
        return self.margin >= 0

    @property
    def holds(self) -> bool:
        return self.theorem_holds and self.trivial_direction is not False and all(t.holds for t in self.traces)

    def to_json(self) -> dict:
        def q(x: Fraction) -> dict:
            return {"exact": fmt(x), "decimal": decimal(x)}

        return {
            "delta": fmt(self.delta),
            "d_delta": fmt(self.d_delta),
            "bound_constant": fmt(self.constant),
            "classical_lower": q(self.classical_lower),
            "dyadic_norm_base": q(self.dyadic_norm_base),
            "dyadic_norm_shifted": q(self.dyadic_norm_shifted),
            "bound": q(self.bound),
            "margin": q(self.margin),
            "witnesses": {k: w.to_json() for k, w in self.witnesses.items()},
            "depth_used": self.depth_used,
            "exact": dict(self.exact),
            "grid_refines": self.grid_refines,
            "trivial_direction": self.trivial_direction,
            "proof_traces": [t.to_json() for t in self.traces],
            "holds": self.holds,
        }


def verify_equivalence(fn: StepFn, shift: Shift, depth: int, grid: Optional[Sequence] = None,
                       extra_arcs: Sequence[Arc] = (), scan: Optional[ArcScan] = None) -> EquivalenceReport:
    """Check both directions of the norm equivalence for one function.

    The classical side is the grid lower bound, the dyadic sides are depth-N
    norms.  The classical witness arc (and any ``extra_arcs``) are replayed
    through :func:`fit_interval` as a proof trace.
    """
    shift.require_admissible()
    if scan is None:
        if grid is None:
            grid = harness_grid(fn, (BASE_SHIFT, shift), depth)
        scan = ArcScan(fn, grid)
    grid = scan.grid
    base = dyadic_bmo_norm(fn, BASE_SHIFT, depth)
    shifted = dyadic_bmo_norm(fn, shift, depth)
    classical, cw = classical_bmo_lower_bound(fn, grid, scan=scan)
    const = 4 / shift.distance
    bound = const * max(base.value, shifted.value)
    gset = set(grid)
    refines = all(p in gset for sh in (BASE_SHIFT, shift) for p in dyadic_grid(sh, depth))
    trivial = (base.value <= classical and shifted.value <= classical) if refines else None
    traces = [proof_trace(fn, a, shift, depth) for a in [cw.arc, *extra_arcs]]
    return EquivalenceReport(
        delta=shift.delta,
        d_delta=shift.distance,
        constant=const,
        classical_lower=classical,
        dyadic_norm_base=base.value,
        dyadic_norm_shifted=shifted.value,
        bound=bound,
        margin=bound - classical,
        witnesses={"classical": cw, BASE: base.witness, SHIFTED: shifted.witness},
        depth_used=depth,
        exact={"classical": False, BASE: base.exact, SHIFTED: shifted.exact},
        grid_refines=refines,
        trivial_direction=trivial,
        traces=traces,
    )


# -- pointwise domination ------------------------------------------------------------


@dataclass
class DominationPoint:
    t: Fraction
    sharp_lower: Fraction
    dyadic_sharp: tuple[Fraction, Fraction]
    maximal_lower: Fraction
    dyadic_maximal: tuple[Fraction, Fraction]
    sharp_arc: Arc
    maximal_arc: Arc


@dataclass
class DominationReport:
    delta: Fraction
    chain_depth: int
    points: list[DominationPoint]
    sharp_constant: Fraction
    maximal_constant: Fraction

    def sharp_violations(self) -> list[DominationPoint]:
        return [p for p in self.points if p.sharp_lower > self.sharp_constant * max(p.dyadic_sharp)]

    def maximal_violations(self) -> list[DominationPoint]:
        return [p for p in self.points if p.maximal_lower > self.maximal_constant * max(p.dyadic_maximal)]

    @property
    def holds(self) -> bool:
        return not self.sharp_violations() and not self.maximal_violations()


def chain_depth_for(grid: Sequence[Fraction], d: Fraction) -> int:
    """Deepest level :func:`fit_interval` can return for an arc of this grid."""
    pts = normalize_grid(grid)
    gaps = [b - a for a, b in zip(pts, pts[1:])] + [pts[0] + 1 - pts[-1]]
    return fit_level(min(gaps), d)


def pointwise_domination(fn: StepFn, shift: Shift, grid: Optional[Sequence] = None, depth: Optional[int] = None,
                         scan: Optional[ArcScan] = None) -> DominationReport:
    """Sharp and maximal domination at every grid point.

    ``depth`` defaults to the deepest level any grid arc is fitted to, which
    is what the fitting argument needs for the dyadic chains.
    """
    shift.require_admissible()
    if scan is None:
        scan = ArcScan(fn, grid)
    grid = scan.grid
    if depth is None:
        depth = chain_depth_for(grid, shift.distance)
    sharp = scan.oscillation_profile()
    maxi = scan.maximal_profile()
    chains = (DyadicChains(fn, BASE_SHIFT), DyadicChains(fn, shift))
    points = []
    for t, s, m in zip(grid, sharp, maxi):
        (sb, mb), (ss, ms) = (c.profile(t, depth) for c in chains)
        points.append(DominationPoint(
            t=t,
            sharp_lower=s.value,
            dyadic_sharp=(sb, ss),
            maximal_lower=m.value,
            dyadic_maximal=(mb, ms),
            sharp_arc=s.arc,
            maximal_arc=m.arc,
        ))
    return DominationReport(shift.delta, depth, points, 4 / shift.distance, 2 / shift.distance)
