"""Constructions that turn convergence statements into explicit objects.

* subsequences whose witness sets can be intersected into one exceptional set,
* the Cauchy diagnostic and the limit candidate built from a Cauchy family,
* diagonal selection from a family of approximating families.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from fractions import Fraction
from typing import Callable, Sequence

from ..exact import Real, simplest_rational
from ..measure_space import (
    Domain,
    MeasurableSubset,
    Partition,
    SimpleFunction,
    integrate_p,
    intersect_all,
)
from ..sequences import SequenceFamily, check_p
from .statistics import DEFAULT_DELTA_GRID, DecayCriterion, StatSeries, Trend
from .verdict import Mode, ModeReport, WitnessReport, by_mode, verdict, witness_verdict

WitnessFn = Callable[[int], MeasurableSubset]


class NotCauchyError(ValueError):
    """The Cauchy diagnostic does not decay at the requested horizon."""


def _full_witness(fam: SequenceFamily) -> WitnessFn:
    return lambda n: MeasurableSubset.full(fam.domain_for(n))


def _resolve_witness(fam: SequenceFamily, witness) -> WitnessFn:
    if witness is not None:
        if isinstance(witness, WitnessReport):
            return witness.witness
        return witness
    if fam.has_witness:
        return fam.witness
    return _full_witness(fam)


def dyadic_indices(complement_measures: Sequence[tuple[int, Fraction]], limit: int | None = None) -> list[int]:
    """``k_n`` = least index after ``k_{n-1}`` with ``mu(B^c) < 2^-n``."""
    out: list[int] = []
    level = 1
    for n, m in complement_measures:
        if limit is not None and len(out) >= limit:
            break
        if out and n <= out[-1]:
            continue
        if m < Fraction(1, 2**level):
            out.append(n)
            level += 1
    return out


# ---------------------------------------------------------------------------
# subsequence extraction


@dataclass(frozen=True)
class SubsequenceExtraction:
    indices: tuple[int, ...]
    sets: tuple[MeasurableSubset, ...]
    complement_measures: tuple[Fraction, ...]
    trimmed: tuple[Real, ...]
    exceptional_set: MeasurableSubset | None
    start: int | None
    complete: bool

    def bound_holds(self) -> bool:
        """``mu(C_n^c) <= 2^-(n-1)`` for every extracted ``n``."""
        return all(m <= Fraction(1, 2 ** (n - 1)) for n, m in enumerate(self.complement_measures, start=1))


def extract_almost_lp_subsequence(
    fam: SequenceFamily,
    witnesses: WitnessReport,
    horizon: int | None = None,
    delta=None,
    terms: int | None = None,
) -> SubsequenceExtraction:
    """Pick ``k_n`` with ``mu(B_{k_n}^c) < 2^-n`` and intersect the tails.

    ``C_n`` is the intersection of ``B_{k_i}`` for ``n <= i <= N`` where ``N``
    is the number of extracted indices.  When ``delta`` is given the
    exceptional set is ``C_{N0}^c`` for the least ``N0`` with measure at most
    ``delta``.  ``complete`` is False if fewer than ``terms`` indices exist.
    """
    p = witnesses.p
    entries = [e for e in witnesses.entries if horizon is None or e.n <= horizon]
    ks = dyadic_indices([(e.n, e.complement_measure) for e in entries], terms)
    wit = {e.n: e.witness for e in entries}

    sets: list[MeasurableSubset] = []
    running = None
    for k in reversed(ks):
        running = wit[k] if running is None else intersect_all([running, wit[k]])
        sets.append(running)
    sets.reverse()

    comps, trims = [], []
    for k, c in zip(ks, sets):
        f, g = fam.pair(k)
        comps.append(c.complement().measure)
        trims.append(integrate_p(f, g, p, c.retruncate(f.domain)))

    exc, start = None, None
    if delta is not None:
        for n, (c, m) in enumerate(zip(sets, comps), start=1):
            if m <= delta:
                exc, start = c.complement(), n
                break
    complete = terms is None or len(ks) >= terms
    return SubsequenceExtraction(tuple(ks), tuple(sets), tuple(comps), tuple(trims), exc, start, complete)


# ---------------------------------------------------------------------------
# Cauchy diagnostics


def _pair_integral(fam: SequenceFamily, p, witness: WitnessFn, n: int, m: int) -> Real:
    s = intersect_all([witness(n), witness(m)])
    return integrate_p(fam.f_at(n), fam.f_at(m), p, s)


def cauchy_stat(fam: SequenceFamily, p, witness: WitnessFn | None, horizon: int, tail_start: int) -> Real:
    """Largest ``int over B_n & B_m of |f_n - f_m|^p`` for ``tail_start <= n < m <= horizon``."""
    p = check_p(p)
    if not 1 <= tail_start <= horizon:
        raise ValueError("tail start must lie in [1, horizon]")
    witness = _resolve_witness(fam, witness)
    best: Real = Fraction(0)
    for n in range(tail_start, horizon + 1):
        for m in range(n + 1, horizon + 1):
            v = _pair_integral(fam, p, witness, n, m)
            if v > best:
                best = v
    return best


def cauchy_series(fam: SequenceFamily, p, witness: WitnessFn | None, horizon: int) -> StatSeries:
    """``c_n`` = largest pair integral for ``n < m <= 2n``, for ``n <= horizon / 2``."""
    p = check_p(p)
    witness = _resolve_witness(fam, witness)
    entries = []
    for n in range(1, horizon // 2 + 1):
        vals = [_pair_integral(fam, p, witness, n, m) for m in range(n + 1, min(2 * n, horizon) + 1)]
        entries.append((n, max(vals)))
    return StatSeries("cauchy", tuple(entries), {"p": p})


@dataclass(frozen=True)
class CompletionResult:
    candidate: SimpleFunction
    report: ModeReport
    indices: tuple[int, ...]
    max_oscillation: float
    cauchy: StatSeries
    cauchy_trend: Trend
    unobserved_cells: int


def complete_limit(
    fam: SequenceFamily,
    p,
    witness: WitnessFn | None = None,
    horizon: int = 64,
    criterion: DecayCriterion = DecayCriterion(),
    delta_grid: Sequence = DEFAULT_DELTA_GRID,
) -> CompletionResult:
    """Limit candidate of an alpha_p-Cauchy family, checked a posteriori.

    Along the extracted indices the witness sets are intersected; on each
    cell the candidate takes the last value seen inside a witness set.  For
    rational data the value is replaced by the simplest rational within the
    observed oscillation, which recovers limits like ``(1 - 1/n) -> 1``.
    Cells never covered by a witness take the value of the nearest covered
    cell.
    """
    p = check_p(p)
    witness = _resolve_witness(fam, witness)
    series = cauchy_series(fam, p, witness, horizon)
    trend = criterion.judge(series, horizon // 2)
    if not trend.decays:
        raise NotCauchyError(f"Cauchy diagnostic does not decay (final window max {float(trend.final_max):.3g})")

    sets = {n: witness(n) for n in range(1, horizon + 1)}
    ks = dyadic_indices([(n, sets[n].complement().measure) for n in range(1, horizon + 1)])
    if not ks:
        raise NotCauchyError("witness complements never drop below 1/2")
    tail = ks[math.ceil(len(ks) / 2) - 1 :] if len(ks) > 1 else ks

    domain = max((fam.domain_for(k) for k in tail), key=lambda d: d.right)
    pts = set()
    for k in tail:
        pts.update(fam.term(k).on_domain(domain).partition.breakpoints)
        pts.update(x for iv in sets[k].retruncate(domain).intervals for x in iv)
    part = Partition.from_points(domain, pts)

    observed: list[list[Real]] = [[] for _ in range(len(part))]
    for k in tail:
        fk = fam.term(k).on_domain(domain).refined_to(part)
        bk = sets[k].retruncate(domain)
        for i, ((lo, hi), v) in enumerate(zip(part.cells, fk.values)):
            if bk.contains_interval(lo, hi):
                observed[i].append(v)

    values: list[Real | None] = []
    osc_max = 0.0
    for obs in observed:
        if not obs:
            values.append(None)
            continue
        last = obs[-1]
        osc = max(obs) - min(obs)
        osc_max = max(osc_max, float(osc))
        if isinstance(last, Fraction) and isinstance(osc, Fraction) and osc > 0:
            last = simplest_rational(last - osc, last + osc)
        values.append(last)
    if all(v is None for v in values):
        raise NotCauchyError("no cell is covered by the extracted witness sets")
    missing = sum(v is None for v in values)
    filled = _fill_nearest(values)
    candidate = SimpleFunction(part, tuple(filled)).simplify()

    limited = _attach_limit(fam, candidate)
    report = by_mode(verdict(limited, p, horizon, criterion, delta_grid))[Mode.ALPHA_P]
    if not report.holds:
        report = ModeReport(
            report.mode, report.verdict, report.certificate, report.horizon, report.tol, report.series,
            report.raw_verdict, report.notes + (f"max cell oscillation {osc_max:.3g}",),
        )
    return CompletionResult(candidate, report, tuple(ks), osc_max, series, trend, missing)


def _fill_nearest(values: list) -> list:
    known = [i for i, v in enumerate(values) if v is not None]
    out = []
    for i, v in enumerate(values):
        if v is None:
            j = min(known, key=lambda j: (abs(j - i), j))
            v = values[j]
        out.append(v)
    return out


def _attach_limit(fam: SequenceFamily, limit: SimpleFunction) -> SequenceFamily:
    if not limit.domain.is_halfline:
        return fam.with_limit(limit)

    def dom(n: int) -> Domain:
        return max(fam.domain_for(n), limit.domain, key=lambda d: d.right)

    return SequenceFamily(fam.name, fam.p_hint, fam.term, limit, fam.canonical_witness, dom, dict(fam.meta))


# ---------------------------------------------------------------------------
# diagonal selection


@dataclass(frozen=True)
class DiagonalSelection:
    selection: tuple[tuple[int, int], ...]
    inner_trimmed: tuple[Real, ...]
    report: ModeReport | None
    complete: bool
    family: SequenceFamily | None


def diagonal_select(
    outer: SequenceFamily,
    inner: Callable[[int], SequenceFamily],
    p,
    horizon: int = 16,
    criterion: DecayCriterion = DecayCriterion(),
    k_limit: int = 2**24,
) -> DiagonalSelection:
    """Choose ``k_n >= n`` with inner trimmed integral below ``2^-n``.

    ``inner(n)`` approximates ``f_n`` (its limit) with witnesses ``D_{n,k}``.
    The least admissible ``k`` is found by a short linear scan followed by
    galloping and bisection, which returns the least one whenever the inner
    statistic is nonincreasing in ``k``.  The composite witness is
    ``C_n = B_n & D_{n,k_n}``.
    """
    p = check_p(p)
    inner = lru_cache(maxsize=None)(inner)
    outer_w = _resolve_witness(outer, None)
    picks: list[tuple[int, int]] = []
    trims: list[Real] = []
    for n in range(1, horizon + 1):
        fam = inner(n)
        w = _resolve_witness(fam, None)
        bound = Fraction(1, 2**n)

        def stat(k: int) -> Real:
            f, g = fam.pair(k)
            return integrate_p(f, g, p, w(k).retruncate(f.domain))

        k = _least_admissible(lambda k: stat(k) < bound, n, k_limit)
        if k is None:
            break
        picks.append((n, k))
        trims.append(stat(k))

    if not picks:
        return DiagonalSelection((), (), None, False, None)
    chosen = dict(picks)
    count = len(picks)

    def term(n: int) -> SimpleFunction:
        return inner(n).term(chosen[n])

    def dom(n: int) -> Domain:
        return max(outer.domain_for(n), inner(n).domain_for(chosen[n]), key=lambda d: d.right)

    def comp(n: int) -> MeasurableSubset:
        fam = inner(n)
        d = _resolve_witness(fam, None)(chosen[n])
        return intersect_all([outer_w(n), d]).retruncate(dom(n))

    composite = SequenceFamily(f"diag({outer.name})", p, term, outer.limit, comp, dom, {"selection": picks})
    report = witness_verdict(composite, composite.witness, p, count, criterion) if count >= 2 else None
    return DiagonalSelection(tuple(picks), tuple(trims), report, count == horizon, composite)


LINEAR_SCAN = 32


def _least_admissible(ok: Callable[[int], bool], start: int, limit: int) -> int | None:
    stop = min(start + LINEAR_SCAN, limit + 1)
    for k in range(start, stop):
        if ok(k):
            return k
    lo = stop - 1  # known inadmissible
    step = LINEAR_SCAN
    hi = None
    while lo < limit:
        cand = min(lo + step, limit)
        if ok(cand):
            hi = cand
            break
        lo = cand
        step *= 2
    if hi is None:
        return None
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


__all__ = [
    "NotCauchyError",
    "SubsequenceExtraction",
    "extract_almost_lp_subsequence",
    "dyadic_indices",
    "cauchy_stat",
    "cauchy_series",
    "CompletionResult",
    "complete_limit",
    "DiagonalSelection",
    "diagonal_select",
]
