"""
Pulling structure out of the typewriter
=======================================

The typewriter converges in measure but not almost in Lp.  A fast
subsequence does converge almost in Lp, and Cauchy families can be completed.
"""

from fractions import Fraction

from modeconv.measure_space import UNIT, MeasurableSubset, SimpleFunction, integrate_p
from modeconv.modes import complete_limit, extract_almost_lp_subsequence, witness_report
from modeconv.sequences import SequenceFamily, gallery

tw = gallery("typewriter", 1)
rep = witness_report(tw, tw.witness, 1, 512)

# indices where the witness complement first drops below 2^-n
ext = extract_almost_lp_subsequence(tw, rep, terms=8, delta=Fraction(1, 16))
print("k_n:", ext.indices)
print("mu(C_n^c):", [str(m) for m in ext.complement_measures])
print("trimmed integrals:", [str(t) for t in ext.trimmed])
print("exceptional set of measure", ext.exceptional_set.measure)


# a sequence with a tall spike and a vanishing ramp; the witness
# sets cut the spike out, so it is alpha_p-Cauchy
def term(n):
    ramp = SimpleFunction.indicator(UNIT, 0, Fraction(1, 2), Fraction(1, n * n))
    spike = SimpleFunction.indicator(UNIT, Fraction(3, 4), Fraction(3, 4) + Fraction(1, 4 * n * n), n * n)
    return SimpleFunction.constant(UNIT, Fraction(2)) + ramp + spike


def cut(n):
    return MeasurableSubset.interval(UNIT, Fraction(3, 4), Fraction(3, 4) + Fraction(1, 4 * n * n)).complement()


fam = SequenceFamily("ramp+spike", 1, term, None, cut)
res = complete_limit(fam, 1)
print("recovered limit:", [str(v) for v in res.candidate.values], "alpha_p:", res.report.verdict.value)
print("distance to 2:", integrate_p(res.candidate, SimpleFunction.constant(UNIT, 2), 1))
