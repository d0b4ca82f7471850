import math
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from dyadbmo.circle import (
    BASE,
    BASE_SHIFT,
    SHIFTED,
    Arc,
    DyadicInterval,
    InadmissibleShift,
    Shift,
    chain,
    containing_interval,
    dyadic_distance,
    fit_interval,
    fit_level,
    interval_at,
    level_partition,
    pairwise_distance,
)
from dyadbmo.rational import decimal, fmt, is_power_of_two, mod1, nearest_int_distance, rat

from conftest import TEST_SHIFTS, rationals
from oracles import arc_contains, naive_d


class TestRational:
    def test_parse_and_format(self):
        assert rat("3/6") == F(1, 2)
        assert rat(" -2 ") == F(-2)
        assert fmt(F(6, 3)) == "2"
        assert fmt(F(-1, 3)) == "-1/3"

    @pytest.mark.parametrize("bad", [0.5, True, None])
    def test_refuses_inexact(self, bad):
        with pytest.raises(TypeError):
            rat(bad)

    def test_malformed_literal(self):
        with pytest.raises(ValueError):
            rat("1/0x")

    def test_helpers(self):
        assert mod1(F(-1, 3)) == F(2, 3)
        assert nearest_int_distance(F(7, 4)) == F(1, 4)
        assert decimal(F(1, 3), 3) == 0.333
        assert is_power_of_two(64) and not is_power_of_two(12)

    @given(rationals(200, -5, 5))
    def test_roundtrip(self, x):
        assert rat(fmt(x)) == x


class TestDyadicDistance:
    @pytest.mark.parametrize("delta,d", [
        ("1/3", "1/3"), ("2/3", "1/3"), ("3/8", "0"), ("1/2", "0"), ("0", "0"),
        ("1/5", "1/5"), ("5/12", "1/6"), ("1/7", "1/7"),
    ])
    def test_examples(self, delta, d):
        assert dyadic_distance(delta) == rat(d)

    def test_oracle_small(self):
        for q in range(1, 41):
            for p in range(q):
                if math.gcd(p, q) == 1:
                    assert dyadic_distance(F(p, q)) == naive_d(p, q)

    def test_exhaustive_properties(self):
        for q in range(2, 201):
            for p in range(1, q):
                if math.gcd(p, q) != 1:
                    continue
                d = dyadic_distance(F(p, q))
                assert d == dyadic_distance(F(q - p, q))
                assert d <= F(1, 3)
                assert (d == F(1, 3)) == (F(p, q) in (F(1, 3), F(2, 3)))
                assert (d > 0) == (not is_power_of_two(q))

    def test_domain(self):
        with pytest.raises(ValueError):
            dyadic_distance(F(4, 3))

    def test_pairwise(self):
        assert pairwise_distance([0, F(1, 3)]) == F(1, 3)
        assert pairwise_distance([F(1, 7), F(2, 7), F(4, 7)]) == F(1, 7)
        assert pairwise_distance([F(1, 4), F(1, 2)]) == 0


class TestShift:
    def test_admissibility(self):
        assert Shift(F(1, 3)).admissible
        with pytest.raises(InadmissibleShift, match="inadmissible shift: d\\(δ\\)=0"):
            Shift(F(1, 2)).require_admissible()


class TestArc:
    def test_validation(self):
        with pytest.raises(ValueError):
            Arc(F(1), F(1, 2))
        with pytest.raises(ValueError):
            Arc(F(0), F(0))

    def test_wrapping_containment(self):
        outer = Arc(F(5, 6), F(1, 2))
        assert outer.wraps
        assert outer.contains(Arc(F(19, 20), F(1, 10)))
        assert outer.contains_point(0) and outer.contains_point(F(1, 3))
        assert not outer.contains_point(F(5, 6))
        assert not Arc(F(0), F(1, 2)).contains(Arc(F(19, 20), F(1, 10)))

    def test_between(self):
        assert Arc.between(F(3, 4), F(1, 4)) == Arc(F(3, 4), F(1, 2))
        assert Arc.between(F(1, 3), F(1, 3)).is_full

    @given(rationals(48), rationals(48), rationals(48), rationals(48))
    def test_containment_oracle(self, a, la, b, lb):
        if la == 0 or lb == 0:
            return
        assert Arc(a, la).contains(Arc(b, lb)) == arc_contains(a, la, b, lb)


class TestDyadicIntervals:
    @pytest.mark.parametrize("shift", [BASE_SHIFT] + [Shift(d) for d in TEST_SHIFTS])
    def test_partitions_tile_and_split(self, shift):
        for n in range(0, 13):
            parts = level_partition(shift, n)
            starts = sorted(p.arc.start for p in parts)
            assert len(starts) == 2 ** n
            # consecutive starts are exactly one length apart around the circle
            gaps = [b - a for a, b in zip(starts, starts[1:])] + [starts[0] + 1 - starts[-1]]
            assert set(gaps) == {F(1, 2 ** n)}
            if n < 12:
                for p in parts[:64]:
                    c0, c1 = p.children()
                    assert c0.arc.start == p.arc.start
                    assert mod1(c0.arc.end) == c1.arc.start
                    assert mod1(c1.arc.end) == mod1(p.arc.end)
                    assert c0.parent() == p

    def test_bad_indices(self):
        with pytest.raises(ValueError):
            DyadicInterval(2, 4)
        with pytest.raises(ValueError):
            DyadicInterval(0, 0).parent()

    @given(rationals(300), st.integers(0, 12))
    def test_interval_at_contains_point(self, t, n):
        sh = Shift(F(1, 3))
        iv = interval_at(t, sh, n)
        assert iv.arc.contains_point(t)
        ch = list(chain(t, sh, n))
        assert ch[-1] == iv and all(a.arc.contains(b.arc) for a, b in zip(ch, ch[1:]))

    def test_containing_interval(self):
        arc = Arc(F(3, 10), F(1, 10))
        assert containing_interval(arc, BASE_SHIFT, 1) == DyadicInterval(1, 0)
        assert containing_interval(arc, Shift(F(1, 3)), 1) is None


class TestFit:
    def test_level(self):
        assert fit_level(F(1, 10), F(1, 3)) == 1
        assert fit_level(F(1, 2), F(1, 3)) == 0
        for n in range(8):
            d = F(1, 5)
            assert fit_level(d / 2 ** (n + 1), d) == n

    def test_examples(self):
        sh = Shift(F(1, 3))
        r = fit_interval(Arc(F(3, 10), F(1, 10)), sh)
        assert (r.filtration, r.interval, r.ratio) == (BASE, DyadicInterval(1, 0), 5)
        r = fit_interval(Arc(F(19, 20), F(1, 10)), sh)
        assert (r.filtration, r.interval.level, r.interval.index, r.ratio) == (SHIFTED, 1, 1, 5)
        assert r.interval.arc == Arc(F(5, 6), F(1, 2))
        r = fit_interval(Arc(F(0), F(1, 2)), sh)
        assert (r.filtration, r.interval, r.ratio) == (BASE, DyadicInterval(0, 0), 2)

    def test_rejects_inadmissible(self):
        with pytest.raises(InadmissibleShift):
            fit_interval(Arc(F(0), F(1, 4)), Shift(F(3, 8)))

    @given(st.sampled_from(TEST_SHIFTS), rationals(1000), rationals(1000, 0, 1, open_hi=False))
    def test_certificate(self, delta, start, length):
        if length == 0:
            return
        sh = Shift(delta)
        arc = Arc(start, length)
        r = fit_interval(arc, sh)
        assert arc_contains(r.interval.arc.start, r.interval.arc.length, start, length)
        assert r.ratio == r.interval.length / length <= 2 / sh.distance
        if r.filtration == SHIFTED:
            # base wins ties
            assert containing_interval(arc, BASE_SHIFT, r.interval.level) is None
