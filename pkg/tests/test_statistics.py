from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from families import random_family
from oracles import knapsack_brute_force
from modeconv.measure_space import UNIT, Domain, MeasurableSubset, SimpleFunction, integrate_p
from modeconv.modes import (
    DecayCriterion,
    StatSeries,
    deviation_stat,
    lp_stat,
    profile,
    trimmed_stat,
    worst_small_set,
)
from modeconv.modes.statistics import window_max_profile, worst_small_set_cells
from modeconv.sequences import gallery


def series(values, name="s"):
    return StatSeries(name, tuple(enumerate(values, start=1)))


class TestDecayCriterion:
    crit = DecayCriterion(1e-9)

    def test_small_final_window_decays(self):
        assert self.crit.judge(series([1] * 12 + [0] * 4)).decays

    def test_contraction_decays(self):
        assert self.crit.judge(series([1 / n for n in range(1, 65)])).decays

    def test_flat_series_persists(self):
        t = self.crit.judge(series([Fraction(1, 2)] * 64))
        assert t.persists and t.final_max == Fraction(1, 2)

    def test_slow_decay_is_open(self):
        # drops by only 5 percent between the windows
        vals = [1.0] * 32 + [0.95] * 32
        assert self.crit.judge(series(vals)).status == "open"

    def test_growth_persists(self):
        assert self.crit.judge(series(list(range(1, 65)))).persists

    def test_tiny_values_never_fail(self):
        t = self.crit.judge(series([5e-9] * 64))
        assert not t.persists and not t.decays

    def test_window_bounds(self):
        assert self.crit.window(256) == (193, 256)
        assert self.crit.window(8) == (7, 8)
        with pytest.raises(ValueError):
            DecayCriterion(0)

    def test_relaxed_scales_tolerance(self):
        assert self.crit.relaxed(10).tol == pytest.approx(1e-8)


def test_series_validation():
    with pytest.raises(ValueError):
        StatSeries("x", ((2, 1), (1, 1)))
    with pytest.raises(ValueError):
        StatSeries("x", ((1, -1),))
    s = series([3, 1, 2])
    assert s.max_over(2, 3) == 2 and s.value_at(3) == 2
    assert s.csv_rows()[0] == (1, "s", None, None, 3)


def test_gallery_statistics_exact():
    spike = gallery("spike", 2)
    assert set(lp_stat(spike, 2, 32).values) == {1}
    assert deviation_stat(spike, Fraction(1, 4), 8, 2).values == [Fraction(1, n) for n in range(1, 9)]
    spread = gallery("spread", 1)
    assert trimmed_stat(spread, 1, Fraction(1, 4), 8).values == [0, 0, 0, 0, 1, 1, 1, 1]


def test_stats_reject_bad_input():
    spike = gallery("spike")
    with pytest.raises(ValueError):
        trimmed_stat(spike, 1, 0, 8)
    with pytest.raises(ValueError):
        lp_stat(spike, 1, 0)


@given(seed=st.integers(0, 10**6), n=st.integers(1, 64), p=st.sampled_from([1, 2, Fraction(3, 2)]))
@settings(max_examples=60, deadline=None)
def test_profile_agrees_with_direct_integration(seed, n, p):
    fam = random_family(seed)
    prof = profile(fam, n, p)
    f, g = fam.pair(n)
    assert prof.lp() == pytest.approx(integrate_p(f, g, p), rel=1e-12, abs=1e-15)
    b = MeasurableSubset.interval(UNIT, Fraction(seed % 7, 8), Fraction(7, 8))
    assert prof.integral_on(b) == pytest.approx(integrate_p(f, g, p, b), rel=1e-12, abs=1e-15)


def test_profile_integral_on_halfline_subset():
    spread = gallery("spread", 1)
    prof = profile(spread, 6, 1)
    s = MeasurableSubset(Domain.halfline(2), [(Fraction(0), Fraction(1))], includes_tail=True)
    # [0, 1) plus [2, 6): five sixths of the mass
    assert prof.integral_on(s) == Fraction(5, 6)


@st.composite
def small_functions(draw):
    cells = draw(st.integers(1, 12))
    inner = sorted(draw(st.lists(st.integers(1, 47), min_size=cells - 1, max_size=cells - 1, unique=True)))
    pts = [Fraction(0)] + [Fraction(k, 48) for k in inner] + [Fraction(1)]
    vals = draw(st.lists(st.fractions(-3, 3, max_denominator=6), min_size=len(pts) - 1, max_size=len(pts) - 1))
    return SimpleFunction.from_steps(UNIT, pts, vals)


@given(f=small_functions(), budget=st.fractions(0, 1, max_denominator=97), p=st.sampled_from([1, 2]))
@settings(max_examples=80, deadline=None)
def test_worst_small_set_is_optimal(f, budget, p):
    zero = SimpleFunction.zero(UNIT)
    s, value = worst_small_set(f, zero, p, budget)
    assert s.measure <= budget
    assert integrate_p(f, zero, p, s) == value
    lengths = [float(b - a) for a, b in f.cells]
    weights = [float(abs(v)) ** p for v in f.values]
    assert float(value) == pytest.approx(knapsack_brute_force(lengths, weights, float(budget)), abs=1e-12)


def test_worst_small_set_examples():
    spike = gallery("spike", 1)
    f, g = spike.pair(4)
    s, v = worst_small_set(f, g, 1, Fraction(1, 10))
    assert v == Fraction(4, 10) and s.measure == Fraction(1, 10)
    _, v = worst_small_set(f, g, 1, Fraction(1, 2))
    assert v == 1
    _, v = worst_small_set(f, f, 1, Fraction(1, 2))
    assert v == 0
    with pytest.raises(ValueError):
        worst_small_set(f, g, 1, 2)
    with pytest.raises(ValueError):
        worst_small_set(f, g, 1, -1)


def test_ties_prefer_leftmost_cell():
    cells = [(Fraction(0), Fraction(1, 2)), (Fraction(1, 2), Fraction(1))]
    s, v = worst_small_set_cells(UNIT, cells, [1, 1], 1, Fraction(1, 4))
    assert s.intervals == ((Fraction(0), Fraction(1, 4)),) and v == Fraction(1, 4)


def test_window_max_profile_dominates_each_term():
    tw = gallery("typewriter", 1)
    prof = window_max_profile(tw, 1, range(4, 8))
    assert set(prof.mags) == {4}
