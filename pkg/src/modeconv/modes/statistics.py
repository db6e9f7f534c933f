"""Convergence statistics, the decay judgement and the worst-small-set adversary."""

from __future__ import annotations

import math
import threading
import weakref
from dataclasses import dataclass, field
from functools import cmp_to_key
from fractions import Fraction
from typing import Iterable, Sequence

from ..exact import Real, abs_pow, as_real
from ..measure_space import Domain, DomainMismatchError, MeasurableSubset, SimpleFunction, align, exact_sum
from ..sequences import SequenceFamily, check_p

DEFAULT_TOL = 1e-9
DEFAULT_HORIZON = 256
DEFAULT_DELTA_GRID = (Fraction(1, 64), Fraction(1, 16), Fraction(1, 4), Fraction(1))


# ---------------------------------------------------------------------------
# statistic series


@dataclass(frozen=True)
class StatSeries:
    stat_name: str
    entries: tuple[tuple[int, Real], ...]
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        ns = [n for n, _ in self.entries]
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise ValueError("series indices must increase strictly")
        for n, v in self.entries:
            if isinstance(v, float) and not math.isfinite(v):
                raise ValueError(f"non-finite value at n = {n}")
            if v < 0:
                raise ValueError(f"negative value at n = {n}")

    @property
    def indices(self) -> list[int]:
        return [n for n, _ in self.entries]

    @property
    def values(self) -> list[Real]:
        return [v for _, v in self.entries]

    def __len__(self) -> int:
        return len(self.entries)

    def value_at(self, n: int) -> Real:
        for m, v in self.entries:
            if m == n:
                return v
        raise KeyError(n)

    def as_dict(self) -> dict[int, Real]:
        return dict(self.entries)

    def max_over(self, lo: int, hi: int) -> Real | None:
        vals = [v for n, v in self.entries if lo <= n <= hi]
        return max(vals) if vals else None

    def csv_rows(self) -> list[tuple]:
        p, delta = self.params.get("p"), self.params.get("delta")
        return [(n, self.stat_name, p, delta, v) for n, v in self.entries]


# ---------------------------------------------------------------------------
# decay judgement


DECAYS = "decays"
PERSISTS = "persists"
OPEN = "open"


@dataclass(frozen=True)
class Trend:
    status: str
    final_max: Real
    earlier_max: Real | None
    horizon: int

    @property
    def decays(self) -> bool:
        return self.status == DECAYS

    @property
    def persists(self) -> bool:
        return self.status == PERSISTS


@dataclass(frozen=True)
class DecayCriterion:
    """Finite-horizon surrogate for "tends to zero".

    A series decays when its maximum over the last ``window_fraction`` of the
    horizon is at most ``tol``, or has contracted by ``contraction`` compared
    with the same window at half the horizon.  It persists when it does not
    decay, sits at least ``failure_factor * tol`` high and has kept at least
    ``persistence`` of its earlier level.
    """

    tol: float = DEFAULT_TOL
    window_fraction: Fraction = Fraction(1, 4)
    contraction: Fraction = Fraction(3, 4)
    persistence: Fraction = Fraction(99, 100)
    failure_factor: int = 10

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tolerance must be positive")
        if not 0 < self.window_fraction <= 1:
            raise ValueError("window fraction must lie in (0, 1]")

    def window(self, horizon: int) -> tuple[int, int]:
        width = max(1, math.ceil(self.window_fraction * horizon))
        return horizon - width + 1, horizon

    def relaxed(self, factor: float) -> DecayCriterion:
        return DecayCriterion(self.tol * factor, self.window_fraction, self.contraction, self.persistence, self.failure_factor)

    def judge(self, series: StatSeries, horizon: int | None = None) -> Trend:
        if horizon is None:
            horizon = series.indices[-1]
        lo, hi = self.window(horizon)
        final = series.max_over(lo, hi)
        if final is None:
            raise ValueError(f"series {series.stat_name!r} has no entries in [{lo}, {hi}]")
        earlier = None
        if horizon >= 2:
            elo, ehi = self.window(horizon // 2)
            earlier = series.max_over(elo, ehi)
        return Trend(self._classify(final, earlier), final, earlier, horizon)

    def _classify(self, final, earlier) -> str:
        if final <= self.tol:
            return DECAYS
        if earlier is not None and earlier > 0 and final <= self.contraction * earlier:
            return DECAYS
        if final < self.failure_factor * self.tol:
            return OPEN
        if earlier is None or final >= self.persistence * earlier:
            return PERSISTS
        return OPEN

    def decays(self, series: StatSeries, horizon: int | None = None) -> bool:
        return self.judge(series, horizon).decays

    def persists(self, series: StatSeries, horizon: int | None = None) -> bool:
        return self.judge(series, horizon).persists


# ---------------------------------------------------------------------------
# per-n difference profiles


@dataclass(frozen=True)
class DiffProfile:
    """``|f_n - f|`` on the refined partition, with cell lengths and p-th power masses."""

    domain: Domain
    cells: tuple[tuple[Fraction, Fraction], ...]
    mags: tuple[Real, ...]
    masses: tuple[Real, ...]

    @classmethod
    def of(cls, f: SimpleFunction, g: SimpleFunction, p) -> DiffProfile:
        f, g = align(f, g)
        cells, mags, masses = [], [], []
        for (lo, hi), a, b in zip(f.cells, f.values, g.values):
            m = abs(a - b)
            cells.append((lo, hi))
            mags.append(m)
            w = abs_pow(m, p)
            masses.append(w * (hi - lo) if isinstance(w, Fraction) else w * float(hi - lo))
        return cls(f.domain, tuple(cells), tuple(mags), tuple(masses))

    def lp(self) -> Real:
        return exact_sum(self.masses)

    def superlevel(self, delta) -> MeasurableSubset:
        return MeasurableSubset(self.domain, [c for c, m in zip(self.cells, self.mags) if m >= delta])

    def deviation(self, delta) -> Fraction:
        return sum((hi - lo for (lo, hi), m in zip(self.cells, self.mags) if m >= delta), Fraction(0))

    def trimmed(self, delta) -> Real:
        return exact_sum(w for w, m in zip(self.masses, self.mags) if m < delta)

    def integral_on(self, s: MeasurableSubset) -> Real:
        """``int_s |f_n - f|^p``, sweeping the cells against the intervals of ``s``."""
        if s.domain != self.domain:
            if not (s.domain.is_halfline and self.domain.is_halfline):
                raise DomainMismatchError("subset and profile live on different domains")
            s = s.retruncate(self.domain)
        terms, i, cells = [], 0, self.cells
        for a, b in s.intervals:
            while i < len(cells) and cells[i][1] <= a:
                i += 1
            j = i
            while j < len(cells) and cells[j][0] < b:
                lo, hi = cells[j]
                w = self.masses[j]
                if w:
                    cut = min(hi, b) - max(lo, a)
                    if cut == hi - lo:
                        terms.append(w)
                    elif isinstance(w, Fraction):
                        terms.append(w * cut / (hi - lo))
                    else:
                        terms.append(w * float(cut / (hi - lo)))
                j += 1
        return exact_sum(terms)


_LOCK = threading.Lock()
_PROFILES: "weakref.WeakKeyDictionary[SequenceFamily, dict]" = weakref.WeakKeyDictionary()


def profile(fam: SequenceFamily, n: int, p) -> DiffProfile:
    """Memoised difference profile of ``f_n`` against the family limit."""
    with _LOCK:
        cache = _PROFILES.setdefault(fam, {})
    key = (n, p)
    prof = cache.get(key)
    if prof is None:
        prof = DiffProfile.of(*fam.pair(n), p)
        cache[key] = prof
    return prof


def _check_horizon(horizon: int):
    if horizon < 1:
        raise ValueError("horizon must be at least 1")


def _check_delta(delta):
    if not delta > 0:
        raise ValueError("delta must be positive")
    return as_real(delta)


def lp_stat(fam: SequenceFamily, p, horizon: int) -> StatSeries:
    p = check_p(p)
    _check_horizon(horizon)
    return StatSeries("lp", tuple((n, profile(fam, n, p).lp()) for n in range(1, horizon + 1)), {"p": p})


def deviation_stat(fam: SequenceFamily, delta, horizon: int, p=1) -> StatSeries:
    """Measure of the superlevel set ``{|f_n - f| >= delta}``; ``p`` only selects the cache."""
    delta = _check_delta(delta)
    _check_horizon(horizon)
    p = check_p(p)
    entries = tuple((n, profile(fam, n, p).deviation(delta)) for n in range(1, horizon + 1))
    return StatSeries("deviation", entries, {"delta": delta})


def trimmed_stat(fam: SequenceFamily, p, delta, horizon: int) -> StatSeries:
    delta = _check_delta(delta)
    _check_horizon(horizon)
    p = check_p(p)
    entries = tuple((n, profile(fam, n, p).trimmed(delta)) for n in range(1, horizon + 1))
    return StatSeries("trimmed", entries, {"p": p, "delta": delta})


# ---------------------------------------------------------------------------
# worst small set


def worst_small_set(f: SimpleFunction, g: SimpleFunction, p, budget) -> tuple[MeasurableSubset, Real]:
    """Set of measure at most ``budget`` carrying the most ``|f - g|^p`` mass.

    Cells are taken greedily by decreasing ``|f - g|`` (leftmost first on
    ties); the last one is cut to its left part so the budget is met exactly.
    """
    p = check_p(p)
    prof = DiffProfile.of(f, g, p)
    return worst_small_set_cells(prof.domain, prof.cells, prof.mags, p, budget)


def worst_small_set_cells(domain: Domain, cells: Sequence[tuple], mags: Sequence[Real], p, budget) -> tuple[MeasurableSubset, Real]:
    budget = Fraction(budget)
    if budget < 0 or budget > domain.measure:
        raise ValueError(f"budget {budget} outside [0, {domain.measure}]")
    order = sorted((i for i, m in enumerate(mags) if m != 0), key=cmp_to_key(lambda i, j: _by_size(mags, i, j)))
    chosen, terms = [], []
    left = budget
    for i in order:
        if left <= 0:
            break
        lo, hi = cells[i]
        take = min(hi - lo, left)
        chosen.append((lo, lo + take))
        w = abs_pow(mags[i], p)
        terms.append(w * take if isinstance(w, Fraction) else w * float(take))
        left -= take
    return MeasurableSubset(domain, chosen), exact_sum(terms)


def _by_size(mags: Sequence[Real], i: int, j: int) -> int:
    if mags[i] > mags[j]:
        return -1
    if mags[i] < mags[j]:
        return 1
    return i - j


def window_max_profile(fam: SequenceFamily, p, indices: Iterable[int]) -> DiffProfile:
    """Pointwise maximum of ``|f_n - f|`` over ``indices`` on the widest domain."""
    profs = [profile(fam, n, p) for n in indices]
    domain = max((pr.domain for pr in profs), key=lambda d: d.right)
    pts = {domain.left, domain.right}
    for pr in profs:
        pts.update(x for c in pr.cells for x in c)
    grid = sorted(pts)
    mags: list[Real] = [Fraction(0)] * (len(grid) - 1)
    pos = {x: i for i, x in enumerate(grid)}
    for pr in profs:
        for (lo, hi), m in zip(pr.cells, pr.mags):
            for i in range(pos[lo], pos[hi]):
                if m > mags[i]:
                    mags[i] = m
    cells = tuple(zip(grid, grid[1:]))
    return DiffProfile(domain, cells, tuple(mags), ())


__all__ = [
    "StatSeries",
    "DecayCriterion",
    "Trend",
    "DiffProfile",
    "profile",
    "lp_stat",
    "deviation_stat",
    "trimmed_stat",
    "worst_small_set",
    "worst_small_set_cells",
    "window_max_profile",
    "DEFAULT_TOL",
    "DEFAULT_HORIZON",
    "DEFAULT_DELTA_GRID",
    "DECAYS",
    "PERSISTS",
    "OPEN",
]
