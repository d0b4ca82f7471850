"""Hypothesis strategies for package objects."""
from fractions import Fraction

from hypothesis import strategies as st

from dyadbmo.stepfn import StepFn


@st.composite
def stepfns(draw, max_den: int = 24, max_pieces: int = 5, dyadic: bool = False):
    den = draw(st.sampled_from([8, 16, 32])) if dyadic else draw(st.integers(2, max_den))
    m = draw(st.integers(1, min(max_pieces, den)))
    pts = draw(st.lists(st.integers(0, den - 1), min_size=m, max_size=m, unique=True))
    vals = draw(st.lists(st.fractions(min_value=-4, max_value=4, max_denominator=6), min_size=m, max_size=m))
    return StepFn(tuple(Fraction(p, den) for p in pts), tuple(vals))


@st.composite
def arcs(draw, max_den: int = 48):
    from dyadbmo.circle import Arc

    q = draw(st.integers(1, max_den))
    start = Fraction(draw(st.integers(0, q - 1)), q)
    r = draw(st.integers(1, max_den))
    length = Fraction(draw(st.integers(1, r)), r)
    return Arc(start, length)
