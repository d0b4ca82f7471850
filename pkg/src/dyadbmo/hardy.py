"""Infinity-atoms on the circle and their transfer to dyadic atoms.

Measures are normalized (the circle has measure 1), so an atom supported on
an arc of length ``L`` satisfies ``sup |a| <= 1/L``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .circle import BASE, BASE_SHIFT, SHIFTED, Arc, DyadicInterval, Shift, containing_interval, fit_interval
from .rational import fmt, is_power_of_two, rat
from .stepfn import StepFn, step_sum


@dataclass(frozen=True)
class AtomCheck:
    ok: bool
    violations: tuple[str, ...] = ()
    integral: Fraction = Fraction(0)
    size_excess: Fraction = Fraction(0)

    def __bool__(self) -> bool:
        return self.ok


def is_atom(profile: StepFn, support: Arc) -> AtomCheck:
    """Check mean zero, the size bound and vanishing off ``support`` exactly."""
    problems = []
    total = profile.total
    if total != 0:
        problems.append(f"mean not zero: integral = {fmt(total)}")
    excess = profile.sup_abs - 1 / support.length
    if excess > 0:
        problems.append(f"size bound exceeded by {fmt(excess)}")
    for piece, v in profile.piece_arcs():
        if v != 0 and not support.contains(piece):
            problems.append(f"nonzero value {fmt(v)} on ({fmt(piece.start)}, +{fmt(piece.length)}] outside support")
    return AtomCheck(not problems, tuple(problems), total, max(excess, Fraction(0)))


@dataclass(frozen=True)
class Atom:
    support: Arc
    profile: StepFn

    def __post_init__(self) -> None:
        check = is_atom(self.profile, self.support)
        if not check:
            raise ValueError("not an atom: " + "; ".join(check.violations))

    def to_json(self) -> dict:
        return {"support": {"start": fmt(self.support.start), "length": fmt(self.support.length)},
                "profile": self.profile.to_json()}


@dataclass(frozen=True)
class DyadicAtom:
    filtration: str
    lam: Fraction
    interval: DyadicInterval
    atom: Atom


def atomize_dyadic(a: Atom, shift: Shift) -> DyadicAtom:
    """Rewrite ``a`` as ``lam * b`` with ``b`` an atom on a fitted dyadic interval.

    An atom already supported on a dyadic interval of either system is kept
    with ``lam = 1``.  Otherwise ``lam`` is the fit ratio |D|/|I| and
    ``sup |b| <= 1/(lam |I|) = 1/|D|``.
    """
    shift.require_admissible()
    own = dyadic_support(a.support, shift)
    if own is not None:
        name, iv = own
        return DyadicAtom(name, Fraction(1), iv, Atom(iv.arc, a.profile))
    fit = fit_interval(a.support, shift)
    lam = fit.ratio
    b = Atom(fit.interval.arc, a.profile.scale(1 / lam))
    return DyadicAtom(fit.filtration, lam, fit.interval, b)


def dyadic_support(arc: Arc, shift: Shift) -> Optional[tuple[str, DyadicInterval]]:
    """The base or shifted dyadic interval equal to ``arc``, if there is one.

    Such an atom is already dyadic and needs no rescaling.
    """
    inv = 1 / arc.length
    if inv.denominator != 1 or not is_power_of_two(inv.numerator):
        return None
    n = inv.numerator.bit_length() - 1
    for name, sh in ((BASE, BASE_SHIFT), (SHIFTED, shift)):
        hit = containing_interval(arc, sh, n)
        if hit is not None and (n == 0 or hit.arc == arc):
            return name, hit
    return None


@dataclass(frozen=True)
class AtomicCombination:
    terms: tuple[tuple[Fraction, Atom], ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "terms", tuple((rat(c), a) for c, a in self.terms))

    def evaluate(self) -> StepFn:
        return step_sum(a.profile.scale(c) for c, a in self.terms)

    @property
    def cost(self) -> Fraction:
        """Sum of |coefficients|: the atomic-norm surrogate of this decomposition."""
        return sum((abs(c) for c, _ in self.terms), Fraction(0))

    def __len__(self) -> int:
        return len(self.terms)

    @classmethod
    def from_json(cls, items: Sequence[dict]) -> "AtomicCombination":
        terms = []
        for it in items:
            sup = it["support"]
            terms.append((rat(it["coefficient"]), Atom(Arc(rat(sup["start"]), rat(sup["length"])),
                                                      StepFn.from_json(it["profile"]))))
        return cls(tuple(terms))

    def to_json(self) -> list[dict]:
        return [{"coefficient": fmt(c), **a.to_json()} for c, a in self.terms]


@dataclass(frozen=True)
class H1Decomposition:
    base: AtomicCombination
    shifted: AtomicCombination
    cost_ratio: Fraction
    lambdas: tuple[Fraction, ...] = field(default=())

    def reconstruct(self) -> StepFn:
        return self.base.evaluate() + self.shifted.evaluate()


def decompose_h1(f: AtomicCombination, shift: Shift) -> H1Decomposition:
    """Split ``f`` into base-dyadic and shifted-dyadic atomic parts.

    Each term c*a becomes (c*lam)*b, so the sum is unchanged and the cost
    grows by at most max lam <= 2/d(delta).
    """
    shift.require_admissible()
    parts = {BASE: [], SHIFTED: []}
    lams = []
    for c, a in f.terms:
        da = atomize_dyadic(a, shift)
        parts[da.filtration].append((c * da.lam, da.atom))
        lams.append(da.lam)
    base, shifted = AtomicCombination(tuple(parts[BASE])), AtomicCombination(tuple(parts[SHIFTED]))
    old = f.cost
    ratio = (base.cost + shifted.cost) / old if old else Fraction(1)
    return H1Decomposition(base, shifted, ratio, tuple(lams))


__all__ = ["Atom", "AtomCheck", "AtomicCombination", "DyadicAtom", "H1Decomposition", "atomize_dyadic",
           "decompose_h1", "dyadic_support", "is_atom"]
