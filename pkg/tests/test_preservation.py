from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from modeconv.measure_space import integrate_p
from modeconv.modes import Mode, by_mode, lp_stat
from modeconv.preservation import (
    BreakingPairs,
    build_counterexample,
    dyadic_below,
    estimate_lipschitz,
    find_breaking_pairs,
    lower_bound_series,
    pair_breaks,
    sampled_witnesses,
    scalar_map,
    snapped_length,
    tabulated_map,
    verify_preservation,
)
from modeconv.sequences import gallery


def test_scalar_map_parsing(tmp_path):
    assert scalar_map("affine(2, 1)")(Fraction(1, 2)) == 2
    assert scalar_map("affine(2,1)").lipschitz == 2
    assert scalar_map("square")(Fraction(-3)) == 9
    assert scalar_map("sqrt_abs")(Fraction(-9, 4)) == Fraction(3, 2)
    assert scalar_map("abs")(Fraction(-1)) == 1
    csv = tmp_path / "phi.csv"
    csv.write_text("x,y\n0,0\n1,3\n2,4\n")
    tab = scalar_map(f"tabulated({csv})")
    assert tab(0.5) == 1.5 and tab(9) == 4 and tab.lipschitz == 3
    for bad in ("cube", "affine(1)", "tabulated()", "!!"):
        with pytest.raises(ValueError):
            scalar_map(bad)
    with pytest.raises(ValueError):
        tabulated_map([0, 0], [1, 2])


@pytest.mark.parametrize(
    "spec, lo, hi, expected",
    [("affine(2,1)", -5, 5, 2.0), ("abs", -1, 1, 1.0), ("square", -10, 10, 19.95)],
)
def test_lipschitz_estimates(spec, lo, hi, expected):
    est = estimate_lipschitz(scalar_map(spec), lo, hi)
    assert est.K_global == pytest.approx(expected, rel=1e-9)
    assert est.local_condition_holds and est.chain_consistent


def test_sqrt_abs_lipschitz_grows_with_resolution():
    coarse = estimate_lipschitz(scalar_map("sqrt_abs"), -1, 1, samples=101).K_global
    fine = estimate_lipschitz(scalar_map("sqrt_abs"), -1, 1, samples=1001).K_global
    assert fine > 3 * coarse


@given(slope=st.floats(-5, 5), shift=st.floats(-5, 5))
@settings(max_examples=30, deadline=None)
def test_lipschitz_of_linear_maps_matches_slope(slope, shift):
    phi = tabulated_map([-10, 10], [shift - 10 * slope, shift + 10 * slope])
    est = estimate_lipschitz(phi, -3, 3, samples=51)
    assert est.K_global == pytest.approx(abs(slope), rel=1e-9, abs=1e-12)


def test_pair_breaks_conditions():
    sq = scalar_map("square")
    assert pair_breaks(Fraction(3, 2), Fraction(1), 1, 1, sq)
    assert not pair_breaks(Fraction(1), Fraction(1), 1, 1, sq)
    assert not pair_breaks(Fraction(3), Fraction(1), 1, 1, sq)  # gap too wide
    assert not pair_breaks(Fraction(1, 8), Fraction(0), 2, 1, sq)  # quotient too small
    with pytest.raises(ValueError):
        BreakingPairs(1, {1: (Fraction(3), Fraction(0))})


@pytest.mark.parametrize("p", [1, 2, Fraction(3, 2)])
def test_found_pairs_satisfy_both_conditions(p):
    sq = scalar_map("square")
    found = find_breaking_pairs(sq, p, 24)
    assert not found.missing
    for n, (a, b) in found.pairs.items():
        assert pair_breaks(a, b, n, p, sq)
        assert isinstance(a, Fraction) and isinstance(b, Fraction)


def test_affine_map_has_no_breaking_pairs():
    found = find_breaking_pairs(scalar_map("affine(2,1)"), 1, 6, levels=12)
    assert found.missing == (2, 3, 4, 5, 6)


def test_snapped_length():
    assert snapped_length(Fraction(1, 4), 2) == (16, True)
    val, exact = snapped_length(Fraction(1, 2), Fraction(1, 2))
    assert not exact and float(val) == pytest.approx(2**0.5, rel=1e-12)


def derived_pairs(horizon):
    # b_n = n, a_n = n + 1/(2n); the quotient is 2n + 1/(2n) > n
    return BreakingPairs(1, {n: (n + Fraction(1, 2 * n), Fraction(n)) for n in range(1, horizon + 1)})


def test_counterexample_structure():
    ce = build_counterexample(scalar_map("square"), derived_pairs(16), 1, 16)
    assert ce.exact
    for n, ((lo, hi), (tlo, thi)) in enumerate(zip(ce.blocks, ce.tails), start=1):
        assert hi - lo == 2 * n
        assert thi == hi and thi - tlo == 2
    assert lp_stat(ce.family, 1, 16).values == [Fraction(1, n) for n in range(1, 17)]
    img = lp_stat(ce.image, 1, 16).values
    assert img == [2 * (2 * n * Fraction(1, 2 * n) + Fraction(1, 4 * n * n)) for n in range(1, 17)]


def test_counterexample_needs_every_pair():
    with pytest.raises(ValueError):
        build_counterexample(scalar_map("square"), derived_pairs(4), 1, 5)


def test_sampled_witness_lower_bounds():
    ce = build_counterexample(scalar_map("square"), derived_pairs(32), 1, 32)
    for w in sampled_witnesses(ce.family, 12, seed=3):
        for n in (1, 7, 32):
            assert w(n).complement().measure < Fraction(1, 2)
        s = lower_bound_series(ce.image, w, 1, 32)
        assert len(s) == 32 and min(s.values) > Fraction(1, 2)


def test_affine_preservation_scales_exactly():
    spike = gallery("spike", 2)
    res = verify_preservation(scalar_map("affine(2,1)"), spike, 2, 256, lipschitz=2)
    assert res.scaling_holds
    assert all(y == 4 * x for x, y in res.scaling["lp"])
    assert all(y == 4 * x for x, y in res.scaling["witness"])
    assert res.preserved == {"Lp": None, "almost_Lp": True, "alpha_p": True, "measure": True}


def test_square_breaks_the_counterexample():
    ce = build_counterexample(scalar_map("square"), derived_pairs(64), 1, 64)
    res = verify_preservation(scalar_map("square"), ce.family, 1, 64)
    after = by_mode(res.after)
    assert after[Mode.ALPHA_P].fails and after[Mode.LP].fails
    assert res.preserved["Lp"] is False


def test_image_integral_matches_direct_composition():
    ce = build_counterexample(scalar_map("square"), derived_pairs(8), 1, 8)
    f, g = ce.family.pair(5)
    direct = integrate_p(f.map(lambda v: v * v), g.map(lambda v: v * v), 1)
    assert direct == integrate_p(*ce.image.pair(5), 1)
    # (5 + 1/10)^2 - 5^2 on a tail of length 2
    assert direct == 2 * (Fraction(51, 10) ** 2 - 25)


@given(x=st.floats(1e-12, 1e12))
def test_dyadic_below_is_close_and_below(x):
    h = dyadic_below(x)
    assert 0 < h < Fraction(x)
    assert (h.denominator & (h.denominator - 1)) == 0
    assert float(Fraction(x) - h) <= x * 2.0**-46
