import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from modeconv.exact import Surd, abs_pow, as_real, iroot, rational_power, simplest_rational

small = st.fractions(min_value=-50, max_value=50, max_denominator=30)
positive = st.fractions(min_value=Fraction(1, 30), max_value=50, max_denominator=30)


def test_iroot_perfect_and_imperfect():
    assert iroot(2**300, 3) == 2**100
    assert iroot(27, 3) == 3
    assert iroot(26, 3) is None
    assert iroot(0, 5) == 0
    with pytest.raises(ValueError):
        iroot(-8, 3)


def test_rational_power_collapses_perfect_powers():
    assert rational_power(Fraction(9, 4), Fraction(1, 2)) == Fraction(3, 2)
    assert rational_power(Fraction(8), Fraction(2, 3)) == 4
    assert rational_power(Fraction(0), Fraction(1, 2)) == 0
    with pytest.raises(ZeroDivisionError):
        rational_power(Fraction(0), Fraction(-1))


def test_surd_is_never_rational():
    assert Surd.make(1, 2, 4, 2) == 5
    assert isinstance(Surd.make(0, 1, 2, 2), Surd)
    # 2^(1/4) squared is a square root, not a rational
    s = Surd.make(0, 1, 2, 4)
    assert isinstance(s, Surd)


def test_sqrt2_squared():
    r = rational_power(Fraction(2), Fraction(1, 2))
    assert r * r == 2
    assert abs_pow(r, 2) == 2


@given(a=small, c=small, r=positive, q=st.integers(2, 4))
def test_surd_float_agrees(a, c, r, q):
    s = Surd.make(a, c, r, q)
    assert math.isclose(float(s), float(a) + float(c) * float(r) ** (1 / q), rel_tol=1e-12, abs_tol=1e-12)


@given(a=small, c=small, r=positive, q=st.integers(2, 4), x=small)
def test_surd_comparison_matches_float_when_separated(a, c, r, q, x):
    s = Surd.make(a, c, r, q)
    if abs(float(s) - float(x)) > 1e-9:
        assert (s < x) == (float(s) < float(x))
        assert (s > x) == (float(s) > float(x))


@given(a=small, c=small, r=positive, q=st.integers(2, 4), b=small, d=small)
def test_surd_sum_with_same_root_stays_exact(a, c, r, q, b, d):
    s1, s2 = Surd.make(a, c, r, q), Surd.make(b, d, r, q)
    total = s1 + s2
    assert not isinstance(total, float)
    assert math.isclose(float(total), float(s1) + float(s2), rel_tol=1e-9, abs_tol=1e-9)
    assert total - s2 == s1


@given(lo=small, width=st.fractions(min_value=0, max_value=3, max_denominator=40))
@settings(max_examples=200)
def test_simplest_rational_against_search(lo, width):
    hi = lo + width
    got = simplest_rational(lo, hi)
    assert lo <= got <= hi
    # brute force over denominators
    den = 1
    while True:
        k = math.ceil(lo * den)
        if Fraction(k, den) <= hi:
            break
        den += 1
    assert got.denominator == den


def test_as_real_normalises_inputs():
    assert as_real(3) == Fraction(3)
    assert as_real("1/3") == Fraction(1, 3)
    with pytest.raises(ValueError):
        as_real(float("nan"))
    with pytest.raises(TypeError):
        as_real(True)


def test_abs_pow_exact_and_float():
    assert abs_pow(Fraction(-1, 4), Fraction(1, 2)) == Fraction(1, 2)
    assert abs_pow(Fraction(4), Fraction(3, 2)) == 8
    assert isinstance(abs_pow(Fraction(2), Fraction(1, 2)), float)
    assert math.isclose(abs_pow(0.5, 2.5), 0.5**2.5)
