"""Seeded test-function corpora.

Every generator draws from its own ``random.Random`` (Mersenne Twister)
seeded with the string ``"<seed>:<kind>"``, so adding a kind to a spec never
perturbs the others.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Union

from .circle import Arc
from .hardy import Atom
from .multidim import GridFn
from .stepfn import StepFn, step_sum

NONDYADIC_DENOMINATORS = (3, 5, 6, 7, 10, 12)
KINDS = ("dyadic", "nondyadic", "haar", "logdist", "atoms", "grid2")
APPROXIMATE = frozenset({"logdist"})


@dataclass(frozen=True)
class CorpusItem:
    name: str
    kind: str
    obj: Union[StepFn, GridFn, Atom]

    @property
    def approximate(self) -> bool:
        return self.kind in APPROXIMATE


def _value(rng: random.Random, span: int = 4) -> Fraction:
    return Fraction(rng.randint(-span, span), rng.choice((1, 2, 3, 4)))


def _stepfn(rng: random.Random, points: list[Fraction]) -> StepFn:
    vals = [_value(rng) for _ in points]
    if len(set(vals)) == 1:
        vals[0] += 1
    return StepFn(tuple(points), tuple(vals))


def random_dyadic(rng: random.Random, depth: int = 6, pieces: int = 6) -> StepFn:
    m = rng.randint(2, pieces)
    pts = sorted(rng.sample(range(2 ** depth), m))
    return _stepfn(rng, [Fraction(k, 2 ** depth) for k in pts])


def random_nondyadic(rng: random.Random, pieces: int = 6) -> StepFn:
    q = rng.choice(NONDYADIC_DENOMINATORS)
    # a second denominator now and then, so jumps of two lattices meet
    dens = [q] if rng.random() < 0.5 else [q, rng.choice(NONDYADIC_DENOMINATORS)]
    cands = sorted({Fraction(p, d) for d in dens for p in range(d)})
    m = rng.randint(2, min(pieces, len(cands)))
    return _stepfn(rng, sorted(rng.sample(cands, m)))


def haar(level: int, index: int) -> StepFn:
    """+1 on the left half, -1 on the right half of (k 2^-n, (k+1) 2^-n]."""
    h = Fraction(1, 2 ** level)
    return StepFn.from_arc_pieces(Arc(index * h, h), [h / 2, h], [1, -1])


def random_haar(rng: random.Random, depth: int = 4) -> StepFn:
    terms = []
    for n in range(depth):
        for k in range(2 ** n):
            if rng.random() < 0.4:
                terms.append(haar(n, k).scale(_value(rng, 3)))
    if not terms:
        terms.append(haar(0, 0))
    return step_sum(terms)


def log_distance(depth: int = 8, center: Fraction = Fraction(1, 2)) -> StepFn:
    """-log2 |t - center| rounded up on dyadic rings, capped at depth + 1.

    Only an approximation of the log singularity.
    """
    radii = [Fraction(1, 2 ** (k + 1)) for k in range(1, depth + 1)]
    rings = [StepFn.indicator(Arc((center - r) % 1, 2 * r)) for r in radii]
    return step_sum(rings).shift_values(1)


def random_atom(rng: random.Random) -> Atom:
    den = rng.choice((8, 16, 32, 3, 5, 7, 12, 20))
    start = Fraction(rng.randrange(den), den)
    length = Fraction(rng.randint(1, den), den * rng.choice((1, 2, 3)))
    length = min(length, Fraction(1))
    cut = length * Fraction(rng.randint(1, 7), 8)
    big = max(cut, length - cut)
    u = Fraction(rng.randint(-4, 4) or 1, 4)
    v1 = u * (length - cut) / (length * big)
    v2 = -u * cut / (length * big)
    arc = Arc(start, length)
    return Atom(arc, StepFn.from_arc_pieces(arc, [cut, length], [v1, v2]))


def random_grid2(rng: random.Random, pieces: int = 3) -> GridFn:
    axes = []
    for _ in range(2):
        den = rng.choice((2, 4, 8, 3, 5, 6))
        m = rng.randint(1, min(pieces, den))
        axes.append(sorted(Fraction(p, den) for p in rng.sample(range(den), m)))
    vals = [[_value(rng) for _ in axes[1]] for _ in axes[0]]
    return GridFn(axes, vals)


def checkerboard() -> GridFn:
    h = Fraction(1, 2)
    return GridFn([[0, h], [0, h]], [[1, -1], [-1, 1]])


def _one(kind: str, rng: random.Random, spec: dict) -> Any:
    if kind == "dyadic":
        return random_dyadic(rng, spec.get("depth", 6))
    if kind == "nondyadic":
        return random_nondyadic(rng)
    if kind == "haar":
        return random_haar(rng, spec.get("depth", 4))
    if kind == "logdist":
        return log_distance(spec.get("depth", 8))
    if kind == "atoms":
        return random_atom(rng)
    if kind == "grid2":
        return random_grid2(rng)
    raise ValueError(f"unknown corpus kind {kind!r}; expected one of {', '.join(KINDS)}")


def generate_corpus(spec, seed: int) -> list[CorpusItem]:
    """Items for one spec ``{"kind": ..., "count": ..., ...}`` or a list of them."""
    specs = spec if isinstance(spec, list) else [spec]
    out = []
    for s in specs:
        if not isinstance(s, dict) or "kind" not in s:
            raise ValueError(f"malformed corpus spec {s!r}")
        kind, count = s["kind"], s.get("count", 1)
        if not isinstance(count, int) or count < 0:
            raise ValueError(f"count must be a non-negative integer, got {count!r}")
        rng = random.Random(f"{seed}:{kind}")
        out += [CorpusItem(f"{kind}-{i}", kind, _one(kind, rng, s)) for i in range(count)]
    return out


def demo_corpus() -> list[CorpusItem]:
    """Small fixed corpus used when no functions are given."""
    half = StepFn.indicator(Arc(Fraction(0), Fraction(1, 2)))
    third = StepFn.indicator(Arc(Fraction(1, 3), Fraction(1, 3)))
    items = [CorpusItem("half", "fixed", half), CorpusItem("third", "fixed", third),
             CorpusItem("haar-1-0", "fixed", haar(1, 0))]
    return items + generate_corpus([{"kind": "dyadic", "count": 3}, {"kind": "nondyadic", "count": 3}], 0)


def theorem_corpus(count: int = 200, seed: int = 0) -> list[CorpusItem]:
    """Dyadic, non-dyadic and Haar functions in equal thirds (remainder to dyadic)."""
    third = count // 3
    return generate_corpus([{"kind": "dyadic", "count": count - 2 * third},
                            {"kind": "nondyadic", "count": third},
                            {"kind": "haar", "count": third, "depth": 5}], seed)


def grid_corpus(count: int = 20, seed: int = 0) -> list[CorpusItem]:
    """Checkerboard, product indicator and random tensor step functions on T^2."""
    half = StepFn.indicator(Arc(Fraction(0), Fraction(1, 2)))
    fixed = [CorpusItem("checkerboard", "fixed", checkerboard()),
             CorpusItem("product-half", "fixed", GridFn.product(half, half))]
    return (fixed + generate_corpus({"kind": "grid2", "count": max(count - 2, 0)}, seed))[:count]
