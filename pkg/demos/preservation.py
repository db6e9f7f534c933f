"""
Which maps keep alpha_p convergence?
====================================

Lipschitz maps scale every statistic by at most K^p.  The square map is not
Lipschitz, and a block construction shows the damage.
"""

from fractions import Fraction

from modeconv.modes import lp_stat
from modeconv.preservation import (
    BreakingPairs,
    build_counterexample,
    estimate_lipschitz,
    lower_bound_series,
    sampled_witnesses,
    scalar_map,
    verify_preservation,
)
from modeconv.sequences import gallery

# affine maps: the integrals scale by exactly 2^p
res = verify_preservation(scalar_map("affine(2,1)"), gallery("spike", 2), 2, 64, lipschitz=2)
print("affine scaling holds:", res.scaling_holds, "preserved:", res.preserved)

# the grid estimate of K grows with the interval for the square map
for hi in (1, 10, 100):
    print(f"square on [-{hi}, {hi}]: K ~ {estimate_lipschitz(scalar_map('square'), -hi, hi).K_global:.2f}")

# pairs a_n, b_n close together whose squares are far apart
pairs = BreakingPairs(1, {n: (n + Fraction(1, 2 * n), Fraction(n)) for n in range(1, 33)})
ce = build_counterexample(scalar_map("square"), pairs, 1, 32)
print("source lp:", [str(v) for v in lp_stat(ce.family, 1, 6).values])
print("image lp:", [f"{float(v):.3f}" for v in lp_stat(ce.image, 1, 6).values])

# no witness sequence with small complements rescues the image
lows = [min(lower_bound_series(ce.image, w, 1, 32).values) for w in sampled_witnesses(ce.family, 10, seed=1)]
print("smallest image integrals:", [f"{float(v):.3f}" for v in lows])
