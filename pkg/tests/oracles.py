"""Independent reference computations used to freeze expected values."""

from __future__ import annotations

from itertools import combinations

import numpy as np


def knapsack_brute_force(lengths, weights, budget: float) -> float:
    """Best ``sum w_i |A cap cell_i|`` over sets of measure ``<= budget``.

    ``weights`` are per-unit densities.  Enumerates every subset of whole
    cells plus at most one partially used cell, so it does not rely on the
    greedy exchange argument.
    """
    lengths = np.asarray(lengths, dtype=float)
    weights = np.asarray(weights, dtype=float)
    n = len(lengths)
    best = 0.0
    for r in range(n + 1):
        for subset in combinations(range(n), r):
            used = lengths[list(subset)].sum() if subset else 0.0
            if used > budget + 1e-15:
                continue
            gain = float((lengths[list(subset)] * weights[list(subset)]).sum()) if subset else 0.0
            left = budget - used
            extra = max((weights[i] * min(lengths[i], left) for i in range(n) if i not in subset), default=0.0)
            best = max(best, gain + extra)
    return best


def relative_entropy_quadrature(rho: float, rho_bar: float, k: float, gamma: float) -> float:
    """``h(rho) - h(rho_bar) - h'(rho_bar)(rho - rho_bar)`` via the integral remainder."""
    from scipy.integrate import quad

    def d2h(s):
        return k * gamma * s ** (gamma - 2)

    val, _ = quad(lambda s: (rho - s) * d2h(s), rho_bar, rho, epsabs=1e-14, epsrel=1e-13, limit=200)
    return val
