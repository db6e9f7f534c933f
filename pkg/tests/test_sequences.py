from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from families import random_family
from modeconv.exact import Surd
from modeconv.measure_space import UNIT, Domain, MeasurableSubset, SimpleFunction, integrate_p
from modeconv.sequences import (
    GALLERY_NAMES,
    check_p,
    combine,
    from_terms,
    gallery,
    pointwise_family,
    root_of,
    trimmed_bound,
    typewriter_index,
    zero_family,
)


def test_typewriter_index_enumerates_dyadic_blocks():
    seen = {}
    for n in range(1, 2**10):
        t = typewriter_index(n)
        assert t.n == n and 0 <= t.j < 2**t.k
        seen.setdefault(t.k, []).append(t.block())
    for k, blocks in seen.items():
        assert blocks[0][0] == 0 and blocks[-1][1] == 1
        assert all(b[1] == c[0] for b, c in zip(blocks, blocks[1:]))
        assert len(blocks) == 2**k
    with pytest.raises(ValueError):
        typewriter_index(0)


def test_check_p():
    assert check_p(2) == Fraction(2)
    assert check_p("3/2") == Fraction(3, 2)
    with pytest.raises(ValueError):
        check_p(Fraction(1, 2))


def test_root_of_is_exact():
    assert root_of(16, 2) == 4
    r = root_of(2, 2)
    assert isinstance(r, Surd) and r * r == 2


def test_gallery_terms():
    spike = gallery("spike", 2)
    f = spike[4]
    assert f(0) == 2 and f(Fraction(1, 4)) == 0
    assert spike.witness(4).measure == Fraction(3, 4)

    spread = gallery("spread", 1)
    assert spread.domain_for(7) == Domain.halfline(7)
    f, g = spread.pair(7)
    assert integrate_p(f, g, 1) == 1

    tw = gallery("typewriter", 1)
    assert tw[5](Fraction(1, 4)) == 4
    assert tw.witness(5).complement().measure == Fraction(1, 4)

    const = gallery("constant")
    assert integrate_p(*const.pair(3), 1) == 0
    with pytest.raises(ValueError):
        gallery("nope")
    assert set(GALLERY_NAMES) == {"spike", "spread", "typewriter", "constant"}


def test_family_indexing_and_memo():
    fam = pointwise_family("p", 1, UNIT, lambda n: [n], [0, 1])
    assert fam[3](0) == 3
    fam = from_terms("t", [SimpleFunction.constant(UNIT, 1)], SimpleFunction.zero(UNIT))
    with pytest.raises(IndexError):
        fam.term(2)
    with pytest.raises(ValueError):
        fam.term(0)
    z = zero_family()
    assert z.term(5) is z.term(5)


def test_subsequence_and_map():
    tw = gallery("typewriter", 1)
    sub = tw.subsequence([1, 2, 4, 8])
    assert sub[3] == tw[4]
    assert sub.witness(4) == tw.witness(8)
    with pytest.raises(ValueError):
        tw.subsequence([3, 3])
    sq = tw.map(lambda v: v * v, "sq")
    assert sq[2](0) == 4 and sq.limit(0) == 0


def test_witness_is_retruncated_on_halflines():
    spread = gallery("spread", 1)
    # the tail beyond the truncation point belongs to the set
    fam = spread.with_witness(lambda n: MeasurableSubset(Domain.halfline(1), [], includes_tail=True))
    assert fam.witness(9).measure == 8
    fam = spread.with_witness(lambda n: MeasurableSubset.full(Domain.halfline(1)))
    assert fam.witness(9).measure == 9


@given(
    s1=st.integers(0, 10**6),
    s2=st.integers(0, 10**6),
    a=st.fractions(-3, 3, max_denominator=4),
    b=st.fractions(-3, 3, max_denominator=4),
    p=st.sampled_from([1, 2, 3]),
    n=st.integers(1, 40),
    cut1=st.fractions(0, 1, max_denominator=16),
    cut2=st.fractions(0, 1, max_denominator=16),
)
@settings(max_examples=80, deadline=None)
def test_combination_respects_the_linearity_bound(s1, s2, a, b, p, n, cut1, cut2):
    f1, f2 = random_family(s1), random_family(s2)
    b1 = MeasurableSubset.interval(UNIT, cut1, 1)
    b2 = MeasurableSubset.interval(UNIT, 0, max(cut2, Fraction(1, 16)))
    fam1, fam2 = f1.with_witness(lambda k: b1), f2.with_witness(lambda k: b2)
    combo = combine(fam1, fam2, a, b)
    lhs = integrate_p(*combo.pair(n), p, combo.witness(n))
    t1 = integrate_p(*fam1.pair(n), p, b1)
    t2 = integrate_p(*fam2.pair(n), p, b2)
    assert lhs <= trimmed_bound(a, b, p, t1, t2)
    assert combo.witness(n) == b1 & b2


def test_combine_rejects_mismatched_spaces():
    with pytest.raises(ValueError):
        combine(gallery("spike"), gallery("spread"), 1, 1)
    with pytest.raises(ValueError):
        combine(gallery("spike", 1), gallery("spike", 2), 1, 1)
