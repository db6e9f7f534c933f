"""Which scalar maps keep a convergent sequence convergent.

Lipschitz maps preserve Lp, almost-Lp and alpha_p convergence; for a map that
is not Lipschitz, ``find_breaking_pairs`` locates points where its difference
quotient beats ``n^(1/p)`` and ``build_counterexample`` turns them into a
family that converges in Lp while its image does not even alpha_p-converge.
"""

from __future__ import annotations

import csv
import math
import random
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .exact import Real, Surd, abs_pow, as_real, exact_exponent, rational_power, simplest_rational
from .measure_space import Domain, MeasurableSubset, SimpleFunction, integrate_p
from .modes import DEFAULT_DELTA_GRID, DecayCriterion, Mode, ModeReport, StatSeries, by_mode, verdict
from .modes.statistics import lp_stat, profile
from .sequences import SequenceFamily, check_p, root_of


@dataclass(frozen=True)
class ScalarMap:
    """A real function, evaluated exactly on exact inputs where it can be."""

    description: str
    evaluator: Callable[[Real], Real]
    lipschitz: Real | None = None

    def __call__(self, x) -> Real:
        y = self.evaluator(as_real(x) if not isinstance(x, (Fraction, Surd, float)) else x)
        if isinstance(y, float) and not math.isfinite(y):
            raise ValueError(f"{self.description} is not finite at {x}")
        return y

    def tabulate(self, xs: np.ndarray) -> np.ndarray:
        return np.fromiter((float(self(float(x))) for x in xs), dtype=float, count=len(xs))


def _affine(m, c) -> ScalarMap:
    m, c = as_real(m), as_real(c)
    return ScalarMap(f"affine({m},{c})", lambda x: m * x + c, abs(m))


def _sqrt_abs(x: Real) -> Real:
    if isinstance(x, Fraction):
        return rational_power(abs(x), Fraction(1, 2))
    return math.sqrt(abs(float(x)))


def _square(x: Real) -> Real:
    return x * x


def tabulated_map(xs: Sequence[float], ys: Sequence[float], name: str = "tabulated") -> ScalarMap:
    """Piecewise-linear interpolation; constant beyond the table ends."""
    xa, ya = np.asarray(xs, dtype=float), np.asarray(ys, dtype=float)
    if xa.ndim != 1 or xa.shape != ya.shape or len(xa) < 2:
        raise ValueError("a tabulated map needs matching x and y columns with at least two rows")
    if np.any(np.diff(xa) <= 0):
        raise ValueError("tabulated x values must increase strictly")
    slope = float(np.max(np.abs(np.diff(ya) / np.diff(xa))))
    return ScalarMap(name, lambda x: float(np.interp(float(x), xa, ya)), slope)


def load_tabulated(path: str | Path) -> ScalarMap:
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().startswith("#"):
                continue
            try:
                rows.append((float(row[0]), float(row[1])))
            except ValueError:
                if rows:
                    raise
                continue  # header line
    xs, ys = zip(*rows) if rows else ((), ())
    return tabulated_map(xs, ys, f"tabulated({Path(path).name})")


MAP_NAMES = ("identity", "affine", "abs", "square", "sqrt_abs", "tabulated")

_CALL = re.compile(r"^\s*([a-z_]+)\s*(?:\((.*)\))?\s*$")


def scalar_map(spec: str) -> ScalarMap:
    """Look up a map by name: ``identity``, ``affine(m,c)``, ``abs``, ``square``,
    ``sqrt_abs`` or ``tabulated(path.csv)``."""
    m = _CALL.match(spec)
    if not m:
        raise ValueError(f"cannot parse map {spec!r}")
    name, args = m.group(1), m.group(2)
    if name == "identity":
        return ScalarMap("identity", lambda x: x, Fraction(1))
    if name == "abs":
        return ScalarMap("abs", abs, Fraction(1))
    if name == "square":
        return ScalarMap("square", _square)
    if name == "sqrt_abs":
        return ScalarMap("sqrt_abs", _sqrt_abs)
    if name == "affine":
        parts = [a.strip() for a in (args or "").split(",")]
        if len(parts) != 2:
            raise ValueError("affine needs two arguments: affine(m,c)")
        return _affine(Fraction(parts[0]), Fraction(parts[1]))
    if name == "tabulated":
        if not args:
            raise ValueError("tabulated needs a CSV path: tabulated(file.csv)")
        return load_tabulated(args.strip())
    raise ValueError(f"unknown map {name!r}; choose from {', '.join(MAP_NAMES)}")


# ---------------------------------------------------------------------------
# Lipschitz estimation


@dataclass(frozen=True)
class LipschitzEstimate:
    K_global: float
    local_condition_holds: bool
    K_local: float
    K_chained: float
    chain_consistent: bool
    spacing: float


def estimate_lipschitz(phi: ScalarMap, lo: float, hi: float, samples: int = 401, delta_local: float = 0.1) -> LipschitzEstimate:
    """Largest difference quotient over all pairs of a uniform grid.

    The local bound uses pairs closer than ``delta_local``; chaining
    neighbouring quotients gives a second global bound, which must agree.
    """
    if not lo < hi or samples < 2:
        raise ValueError("need lo < hi and at least two samples")
    if not delta_local > 0:
        raise ValueError("delta_local must be positive")
    xs = np.linspace(lo, hi, samples)
    ys = phi.tabulate(xs)
    k_global = 0.0
    k_local = 0.0
    chunk = max(1, 2_000_000 // samples)
    for start in range(0, samples - 1, chunk):
        a = xs[start : start + chunk, None]
        fa = ys[start : start + chunk, None]
        dx = xs[None, :] - a
        mask = dx > 0
        q = np.abs(ys[None, :] - fa)[mask] / dx[mask]
        if q.size:
            k_global = max(k_global, float(q.max()))
            near = q[dx[mask] < delta_local]
            if near.size:
                k_local = max(k_local, float(near.max()))
    k_chain = float(np.max(np.abs(np.diff(ys)) / np.diff(xs)))
    return LipschitzEstimate(
        k_global,
        k_local <= k_global * (1 + 1e-9),
        k_local,
        k_chain,
        k_chain <= k_global * (1 + 1e-6) and k_global <= k_chain * (1 + 1e-6),
        float(xs[1] - xs[0]),
    )


# ---------------------------------------------------------------------------
# breaking pairs


@dataclass(frozen=True)
class BreakingPairs:
    p: Fraction | float
    pairs: dict = field(default_factory=dict)
    missing: tuple[int, ...] = ()

    def __post_init__(self):
        for n, (a, b) in self.pairs.items():
            if not pair_breaks(a, b, n, self.p, None):
                raise ValueError(f"pair for n = {n} does not satisfy the gap condition")

    def __getitem__(self, n: int) -> tuple[Real, Real]:
        return self.pairs[n]

    @property
    def horizon(self) -> int:
        return max(self.pairs) if self.pairs else 0


def pair_breaks(a: Real, b: Real, n: int, p, phi: ScalarMap | None) -> bool:
    """``0 < |a-b| < n^(-1/p)`` and, if ``phi`` is given, ``|phi(a)-phi(b)| > n^(1/p)|a-b|``."""
    gap = abs(a - b)
    r = root_of(n, p)
    if not (gap > 0 and gap * r < 1):
        return False
    if phi is None:
        return True
    return abs(phi(a) - phi(b)) > r * gap


def default_centers() -> list[Fraction]:
    """0 and the signed powers of two from 2^-20 to 2^20, by magnitude."""
    out = [Fraction(0)]
    for m in range(-20, 21):
        c = Fraction(2) ** m
        out.extend((c, -c))
    return out


def dyadic_below(x: Real, bits: int = 48) -> Fraction:
    """A dyadic rational in ``(0, x)`` within relative ``2^-bits`` of ``x > 0``."""
    if not x > 0:
        raise ValueError("dyadic_below needs a positive number")
    _, e = math.frexp(float(x))
    scale = Fraction(2) ** (bits - e)
    k = math.floor(float(x) * 2.0 ** (bits - e)) - 1
    h = k / scale
    while h >= x:
        k -= 1
        h = k / scale
    while h <= 0:
        k += 1
        h = k / scale
    return h


def _plausible(phi: ScalarMap, a, b, r: float) -> bool:
    """Cheap float screen ahead of the exact test; errs towards True."""
    try:
        q = abs(float(phi(float(a))) - float(phi(float(b)))) / float(a - b)
    except (ValueError, OverflowError, ZeroDivisionError):
        return True
    return not math.isfinite(q) or q > r * (1 - 1e-6)


def find_breaking_pairs(
    phi: ScalarMap,
    p,
    horizon: int,
    centers: Sequence | None = None,
    levels: int = 40,
) -> BreakingPairs:
    """Scan centers ``c`` and offsets ``h ~ n^(-1/p) / 2^j``; first hit wins.

    Pairs are ``(a, b) = (c + h, c)``.  Indices with no hit are listed in
    ``missing``.
    """
    p = check_p(p)
    centers = default_centers() if centers is None else [as_real(c) for c in centers]
    found, missing = {}, []
    for n in range(1, horizon + 1):
        base = 1 / root_of(n, p)
        float_r = float(root_of(n, p))
        hit = None
        offsets = [base / 2**j for j in range(1, levels + 1)]
        offsets = [h if isinstance(h, Fraction) else dyadic_below(h) for h in offsets]
        for c in centers:
            for h in offsets:
                a, b = c + h, c
                try:
                    if not _plausible(phi, a, b, float_r):
                        continue
                    if pair_breaks(a, b, n, p, phi):
                        hit = (a, b)
                        break
                except (ValueError, OverflowError):
                    continue
            if hit:
                break
        if hit:
            found[n] = hit
        else:
            missing.append(n)
    return BreakingPairs(p, found, tuple(missing))


# ---------------------------------------------------------------------------
# the counterexample family


SNAP_RELATIVE = 1e-12


def snapped_length(gap: Real, p) -> tuple[Fraction, bool]:
    """``1 / |gap|^p`` as a rational; the flag tells whether it is exact."""
    w = abs_pow(gap, p)
    if isinstance(w, Fraction):
        return 1 / w, True
    x = 1.0 / float(w)
    lo, hi = Fraction(x * (1 - SNAP_RELATIVE)), Fraction(x * (1 + SNAP_RELATIVE))
    return simplest_rational(lo, hi), False


@dataclass(frozen=True)
class Counterexample:
    family: SequenceFamily
    image: SequenceFamily
    blocks: tuple[tuple[Fraction, Fraction], ...]
    tails: tuple[tuple[Fraction, Fraction], ...]
    exact: bool


def build_counterexample(phi: ScalarMap, pairs: BreakingPairs, p, horizon: int) -> Counterexample:
    """Block construction: ``f_n`` differs from ``f`` only on the end of block ``n``.

    Block ``k`` has length ``1/|a_k - b_k|^p``; on its last ``1/k`` fraction
    ``I_k`` the limit is ``b_k`` and ``f_k`` is ``a_k``.  The first tail is
    the whole first block.  Elsewhere both vanish.
    """
    p = check_p(p)
    missing = [n for n in range(1, horizon + 1) if n not in pairs.pairs]
    if missing:
        raise ValueError(f"no breaking pair for n = {missing[0]}")
    starts = [Fraction(0)]
    tails, exact = [], True
    for k in range(1, horizon + 1):
        a, b = pairs[k]
        length, ok = snapped_length(a - b, p)
        exact &= ok
        s0 = starts[-1]
        s1 = s0 + length
        tails.append((s0 + (k - 1) * length / k, s1))
        starts.append(s1)
    domain = Domain.halfline(starts[-1])
    blocks = tuple(zip(starts, starts[1:]))

    pts = [domain.left]
    for lo, hi in tails:
        pts.extend((lo, hi))
    pts = sorted(set(pts) | {domain.right})
    tail_index = {lo: k for k, (lo, _) in enumerate(tails, start=1)}
    base_vals = [pairs[tail_index[lo]][1] if lo in tail_index else Fraction(0) for lo in pts[:-1]]
    limit = SimpleFunction.from_steps(domain, pts, base_vals)
    cell_of = {lo: i for i, lo in enumerate(pts[:-1])}

    def gen(n: int) -> SimpleFunction:
        vals = list(base_vals)
        vals[cell_of[tails[n - 1][0]]] = pairs[n][0]
        return SimpleFunction.from_steps(domain, pts, vals)

    fam = SequenceFamily("counterexample", p, gen, limit, None, None, {"map": phi.description})
    image = fam.map(phi, f"{phi.description}(counterexample)")
    return Counterexample(fam, image, blocks, tuple(tails), exact)


def lower_bound_series(image: SequenceFamily, witness: Callable[[int], MeasurableSubset], p, horizon: int) -> StatSeries:
    """Integrals over ``B_n`` for every ``n`` from the first with ``mu(B_n^c) < 1/2``."""
    entries, started = [], False
    for n in range(1, horizon + 1):
        prof = profile(image, n, p)
        b = witness(n).retruncate(prof.domain)
        started = started or b.complement().measure < Fraction(1, 2)
        if started:
            entries.append((n, prof.integral_on(b)))
    return StatSeries("image_trimmed", tuple(entries), {"p": p})


def sampled_witnesses(
    fam: SequenceFamily, count: int, seed: int = 0, bound=Fraction(1, 2)
) -> list[Callable[[int], MeasurableSubset]]:
    """Seeded witness sequences whose complements all have measure below ``bound``.

    Odd-numbered samples spend their budget inside the support of
    ``f_n - f`` (the adversarial choice); even ones place it anywhere.
    """
    def make(i: int) -> Callable[[int], MeasurableSubset]:
        def witness(n: int) -> MeasurableSubset:
            rng = random.Random(f"{seed}:{i}:{n}")
            prof = profile(fam, n, 1)
            dom = prof.domain
            budget = Fraction(rng.randrange(0, 1000), 1000) * bound * Fraction(999, 1000)
            if i % 2:
                spots = [c for c, m in zip(prof.cells, prof.mags) if m != 0]
            else:
                spots = [(dom.left, dom.right)]
            spots = spots or [(dom.left, dom.right)]
            pieces = []
            for _ in range(rng.randint(1, 3)):
                lo, hi = spots[rng.randrange(len(spots))]
                width = min(hi - lo, budget * Fraction(rng.randint(1, 100), 100))
                start = lo + (hi - lo - width) * Fraction(rng.randrange(0, 1001), 1000)
                pieces.append((start, start + width))
            removed = MeasurableSubset(dom, tuple(pieces), False)
            while removed.measure >= bound:
                pieces = [(a, a + (b - a) / 2) for a, b in pieces]
                removed = MeasurableSubset(dom, tuple(pieces), False)
            return removed.complement()

        return witness

    return [make(i) for i in range(count)]


# ---------------------------------------------------------------------------
# before / after comparison


@dataclass(frozen=True)
class PreservationResult:
    before: list[ModeReport]
    after: list[ModeReport]
    preserved: dict
    scaling_holds: bool | None
    scaling: dict


def verify_preservation(
    phi: ScalarMap,
    fam: SequenceFamily,
    p,
    horizon: int = 256,
    criterion: DecayCriterion = DecayCriterion(),
    delta_grid: Sequence = DEFAULT_DELTA_GRID,
    lipschitz=None,
) -> PreservationResult:
    """Verdicts for ``f_n -> f`` and ``phi(f_n) -> phi(f)`` side by side.

    ``preserved[mode]`` is None when the mode does not hold before, and
    otherwise whether it still holds after.  With a Lipschitz constant
    ``K`` the per-n bound ``after <= K^p * before`` is checked exactly for
    the Lp integrals and for the integrals over the alpha_p witnesses.
    """
    p = check_p(p)
    image = fam.map(phi, f"{phi.description}({fam.name})")
    before = verdict(fam, p, horizon, criterion, delta_grid)
    after = verdict(image, p, horizon, criterion, delta_grid)
    b, a = by_mode(before), by_mode(after)
    preserved = {m.value: (None if not b[m].holds else a[m].holds) for m in Mode}

    scaling_holds, scaling = None, {}
    if lipschitz is not None:
        K = as_real(lipschitz)
        Kp = abs_pow(K, p) if exact_exponent(p) is not None else float(K) ** float(p)
        lp_b, lp_a = lp_stat(fam, p, horizon), lp_stat(image, p, horizon)
        pairs = list(zip(lp_b.values, lp_a.values))
        scaling["lp"] = pairs
        ok = all(y <= Kp * x for x, y in pairs)
        if b[Mode.ALPHA_P].holds:
            wit = []
            for e in b[Mode.ALPHA_P].certificate.entries:
                f, g = image.pair(e.n)
                wit.append((e.trimmed_integral, integrate_p(f, g, p, e.witness)))
            scaling["witness"] = wit
            ok = ok and all(y <= Kp * x for x, y in wit)
        scaling["K_p"] = Kp
        scaling_holds = ok
    return PreservationResult(before, after, preserved, scaling_holds, scaling)


__all__ = [
    "ScalarMap",
    "scalar_map",
    "tabulated_map",
    "load_tabulated",
    "MAP_NAMES",
    "LipschitzEstimate",
    "estimate_lipschitz",
    "BreakingPairs",
    "pair_breaks",
    "find_breaking_pairs",
    "default_centers",
    "dyadic_below",
    "Counterexample",
    "build_counterexample",
    "snapped_length",
    "lower_bound_series",
    "sampled_witnesses",
    "PreservationResult",
    "verify_preservation",
]
