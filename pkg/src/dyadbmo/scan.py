"""Suprema over all arcs with endpoints on a finite grid.

Positions are scaled to integers (common denominator Q of grid and
breakpoints) and values to integers (common denominator V), so that the
deviation sum ``T = sum overlap * |L*w - S|`` of every arc is an exact int64.
The mean oscillation of the arc is ``T / (L^2 V)``.

Ranking uses ``fl(T / L^2)``.  Both operands are exact doubles (the budget
check keeps them below 2**53) and IEEE division is correctly rounded, hence
monotone: the exact maximum over any set of arcs is attained among the arcs
whose float equals the float maximum.  Those are re-evaluated as Fractions.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from .circle import Arc
from .rational import common_denominator, mod1, rat
from .stepfn import StepFn

log = logging.getLogger(__name__)

EXACT_FLOAT_LIMIT = 2 ** 53
# up to this many distinct values the deviation table is built with numpy
# (cost ~ values * G^2), beyond it with the compiled per-segment kernel
VALUE_CLASS_LIMIT = 3


def normalize_grid(grid: Sequence) -> list[Fraction]:
    pts = sorted({mod1(rat(g)) for g in grid})
    if not pts:
        raise ValueError("grid must be non-empty")
    return pts


def group_exact(ratio: np.ndarray, num: np.ndarray, den: np.ndarray, scale: int) -> dict[float, Optional[Fraction]]:
    """Map each float in ``ratio`` to the common exact value num/(den*scale) of
    all entries sharing that float, or None when they disagree."""
    if ratio.size == 0:
        return {}
    n = num.astype(np.int64)
    d = den.astype(np.int64)
    g = np.gcd(n, d)
    n //= g
    d //= g
    order = np.argsort(ratio, kind="stable")
    r, n, d = ratio[order], n[order], d[order]
    cut = np.flatnonzero(np.diff(r)) + 1
    starts = np.concatenate(([0], cut))
    ends = np.concatenate((cut, [r.size]))
    out: dict[float, Optional[Fraction]] = {}
    for a, b in zip(starts, ends):
        if np.all(n[a:b] == n[a]) and np.all(d[a:b] == d[a]):
            out[float(r[a])] = Fraction(int(n[a]), int(d[a]) * scale)
        else:
            out[float(r[a])] = None
    return out


@dataclass
class ScanResult:
    value: Fraction
    arc: Arc


class ArcScan:
    """All arcs (grid[i], grid[i] + length] whose right end is also a grid point.

    Arc ``(i, s)`` starts at grid point i and spans s grid steps; s = G is
    the full circle.  ``method`` is ``"kernel"`` (compiled int64 scan),
    ``"python"`` (Fractions throughout) or ``"auto"``.
    """

    def __init__(self, fn: StepFn, grid: Sequence, method: str = "auto"):
        self.fn = fn
        self.grid = normalize_grid(grid)
        self.G = len(self.grid)
        self.Q = common_denominator(list(self.grid) + list(fn.breakpoints))
        self.V = common_denominator(fn.values)
        w_max = max(abs(v) for v in fn.values) * self.V
        fits = 2 * self.Q * self.Q * (w_max + 1) < EXACT_FLOAT_LIMIT
        if method == "auto":
            method = "kernel" if fits else "python"
        if method == "kernel" and not fits:
            raise OverflowError("grid/value denominators exceed the int64 budget; use method='python'")
        if method not in ("kernel", "python"):
            raise ValueError(f"unknown scan method {method!r}")
        self.method = method
        q = self.Q
        self._ext = np.array([int(g * q) for g in self.grid] + [int(g * q) + q for g in self.grid], dtype=np.int64)

    # -- geometry ------------------------------------------------------------

    @cached_property
    def _ends(self) -> np.ndarray:
        i = np.arange(self.G)[:, None]
        s = np.arange(1, self.G + 1)[None, :]
        return i + s

    @cached_property
    def lengths(self) -> np.ndarray:
        """Integer arc lengths (units of 1/Q), shape (G, G)."""
        return self._ext[self._ends] - self._ext[:self.G, None]

    def arc(self, i: int, s: int) -> Arc:
        return Arc(self.grid[i], Fraction(int(self.lengths[i, s - 1]), self.Q))

    def arcs_containing(self, t) -> np.ndarray:
        """smin[i]: fewest steps from grid[i] for the arc to contain t."""
        t = rat(t)
        lengths = self.lengths
        out = np.empty(self.G, dtype=np.int64)
        for i, g in enumerate(self.grid):
            u = mod1(t - g) or Fraction(1)
            need = math.ceil(u * self.Q)
            out[i] = int(np.searchsorted(lengths[i], need, side="left")) + 1
        return out

    def _grid_smin(self) -> np.ndarray:
        # smin for every grid point j as a query: (j - i) mod G, with 0 -> G
        i = np.arange(self.G)[:, None]
        j = np.arange(self.G)[None, :]
        r = (j - i) % self.G
        r[r == 0] = self.G
        return r

    # -- integer data ----------------------------------------------------------

    @cached_property
    def _segments(self) -> tuple[np.ndarray, np.ndarray]:
        xs, vals, _ = self.fn._segments
        q, v = self.Q, self.V
        xi = [int(x * q) for x in xs]
        wi = [int(w * v) for w in vals]
        xs2 = np.array(xi + [x + q for x in xi[1:]], dtype=np.int64)
        ws2 = np.array(wi + wi, dtype=np.int64)
        return xs2, ws2

    def _primitive(self, w: np.ndarray) -> np.ndarray:
        """Integral of the step weights ``w`` from 0 to each point of ``_ext``."""
        xs2 = self._segments[0]
        prefix = np.concatenate(([0], np.cumsum(np.diff(xs2) * w)))
        j = np.clip(np.searchsorted(xs2, self._ext, side="right") - 1, 0, w.size - 1)
        return prefix[j] + (self._ext - xs2[j]) * w[j]

    def _arc_table(self, w: np.ndarray) -> np.ndarray:
        F = self._primitive(w)
        return F[self._ends] - F[:self.G, None]

    @cached_property
    def deviation(self) -> np.ndarray:
        """T[i, s-1] (int64) for the kernel path."""
        xs2, ws2 = self._segments
        classes = np.unique(ws2)
        if classes.size <= VALUE_CLASS_LIMIT:
            # T = sum over values v of |{w = v} in arc| * |L v - S|; whole-array
            # numpy, which also spares small problems the JIT start-up
            S = self._arc_table(ws2)
            T = np.zeros_like(S)
            for v in classes.tolist():
                T += self._arc_table((ws2 == v).astype(np.int64)) * np.abs(self.lengths * v - S)
            return T
        from ._kernels import arc_deviation_matrix

        grid = self._ext[:self.G].copy()
        return arc_deviation_matrix(xs2, ws2, grid, self.Q)

    @cached_property
    def lengths_sq(self) -> np.ndarray:
        return self.lengths * self.lengths

    @cached_property
    def osc_float(self) -> np.ndarray:
        return self.deviation.astype(np.float64) / self.lengths_sq.astype(np.float64)

    @cached_property
    def abs_integral(self) -> np.ndarray:
        """A[i, s-1] = sum overlap * |w|, via prefix sums of |phi|."""
        return self._arc_table(np.abs(self._segments[1]))

    @cached_property
    def avg_abs_float(self) -> np.ndarray:
        return self.abs_integral.astype(np.float64) / self.lengths.astype(np.float64)

    # -- exact evaluation ----------------------------------------------------------

    def exact_oscillation(self, i: int, s: int) -> Fraction:
        if self.method == "kernel":
            ln = int(self.lengths[i, s - 1])
            return Fraction(int(self.deviation[i, s - 1]), ln * ln * self.V)
        from .bmo import mean_oscillation

        return mean_oscillation(self.fn, self.arc(i, s))

    def exact_avg_abs(self, i: int, s: int) -> Fraction:
        if self.method == "kernel":
            return Fraction(int(self.abs_integral[i, s - 1]), int(self.lengths[i, s - 1]) * self.V)
        from .bmo import average

        return average(abs(self.fn), self.arc(i, s))

    @cached_property
    def _python_osc(self) -> list[list[Fraction]]:
        from .bmo import mean_oscillation

        return [[mean_oscillation(self.fn, self.arc(i, s)) for s in range(1, self.G + 1)] for i in range(self.G)]

    @cached_property
    def _python_avg(self) -> list[list[Fraction]]:
        from .bmo import average

        f = abs(self.fn)
        return [[average(f, self.arc(i, s)) for s in range(1, self.G + 1)] for i in range(self.G)]

    # -- suprema --------------------------------------------------------------------

    def max_oscillation(self) -> ScanResult:
        if self.method == "python":
            best = max(((v, i, s + 1) for i, row in enumerate(self._python_osc) for s, v in enumerate(row)),
                       key=lambda x: x[0])
            return ScanResult(best[0], self.arc(best[1], best[2]))
        r = self.osc_float
        top = r.max()
        ii, ss = np.nonzero(r == top)
        best_v, best_at = None, None
        seen = set()
        for i, s in zip(ii.tolist(), ss.tolist()):
            key = (int(self.deviation[i, s]), int(self.lengths[i, s]))
            if key in seen:
                continue
            seen.add(key)
            v = self.exact_oscillation(i, s + 1)
            if best_v is None or v > best_v:
                best_v, best_at = v, (i, s + 1)
        return ScanResult(best_v, self.arc(*best_at))

    def _profile(self, kind: str, smin: np.ndarray) -> list[ScanResult]:
        """Exact max over arcs (i, s >= smin[i, q]) for each query column q."""
        if self.method == "python":
            table = self._python_osc if kind == "osc" else self._python_avg
            out = []
            for qi in range(smin.shape[1]):
                best = max(((table[i][s - 1], i, s) for i in range(self.G) for s in range(int(smin[i, qi]), self.G + 1)),
                           key=lambda x: x[0])
                out.append(ScanResult(best[0], self.arc(best[1], best[2])))
            return out
        if kind == "osc":
            ratio, num, den = self.osc_float, self.deviation, self.lengths_sq
        else:
            ratio, num, den = self.avg_abs_float, self.abs_integral, self.lengths
        from ._kernels import match_sorted, suffix_profile

        best, best_row, best_step = suffix_profile(ratio, np.ascontiguousarray(smin))
        targets = np.unique(best)
        mask = match_sorted(ratio, targets)
        exact = group_exact(ratio[mask], num[mask], den[mask], self.V)
        out = []
        for qi, f in enumerate(best.tolist()):
            i, s = int(best_row[qi]), int(best_step[qi])
            v = exact[f]
            if v is None:
                v, (i, s) = self._resolve(ratio, f, smin[:, qi], kind)
            out.append(ScanResult(v, self.arc(i, s)))
        return out

    def _resolve(self, ratio, f, smin_col, kind):
        ev = self.exact_oscillation if kind == "osc" else self.exact_avg_abs
        best = None
        for i in range(self.G):
            for s0 in np.flatnonzero(ratio[i, smin_col[i] - 1:] == f).tolist():
                s = s0 + int(smin_col[i])
                v = ev(i, s)
                if best is None or v > best[0]:
                    best = (v, (i, s))
        return best

    def oscillation_profile(self) -> list[ScanResult]:
        """Sharp-function lower bound at every grid point."""
        return self._profile("osc", self._grid_smin())

    def maximal_profile(self) -> list[ScanResult]:
        """Maximal-function lower bound at every grid point."""
        return self._profile("avg", self._grid_smin())

    def oscillation_at(self, t) -> ScanResult:
        return self._profile("osc", self.arcs_containing(t)[:, None])[0]

    def maximal_at(self, t) -> ScanResult:
        return self._profile("avg", self.arcs_containing(t)[:, None])[0]
