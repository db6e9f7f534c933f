"""Three-valued verdicts for the four modes and the certificates behind them."""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from fractions import Fraction
from typing import Callable, Sequence

from ..exact import Real, as_real
from ..measure_space import MeasurableSubset, integrate_p, intersect_all
from ..sequences import SequenceFamily, check_p
from .statistics import (
    DEFAULT_DELTA_GRID,
    DEFAULT_HORIZON,
    DecayCriterion,
    StatSeries,
    Trend,
    deviation_stat,
    lp_stat,
    profile,
    trimmed_stat,
    window_max_profile,
    worst_small_set_cells,
)


class Mode(str, Enum):
    LP = "Lp"
    ALMOST_LP = "almost_Lp"
    ALPHA_P = "alpha_p"
    MEASURE = "measure"


class Verdict(str, Enum):
    HOLDS = "CERTIFIED_HOLDS"
    FAILS = "CERTIFIED_FAILS_AT_HORIZON"
    UNDETERMINED = "UNDETERMINED"


# strongest first: each mode implies every later one
CHAIN = (Mode.LP, Mode.ALMOST_LP, Mode.ALPHA_P, Mode.MEASURE)


@dataclass(frozen=True)
class WitnessEntry:
    n: int
    witness: MeasurableSubset
    complement_measure: Fraction
    trimmed_integral: Real


@dataclass(frozen=True)
class WitnessReport:
    """Witness sets ``B_n`` with ``mu(B_n^c)`` and the integral of ``|f_n - f|^p`` over ``B_n``."""

    p: Fraction | float
    entries: tuple[WitnessEntry, ...]
    delta: Real | None = None
    source: str = "superlevel"

    def complement_series(self) -> StatSeries:
        return StatSeries("witness_complement", tuple((e.n, e.complement_measure) for e in self.entries), {"delta": self.delta})

    def trimmed_series(self) -> StatSeries:
        return StatSeries("witness_trimmed", tuple((e.n, e.trimmed_integral) for e in self.entries), {"p": self.p, "delta": self.delta})

    def witness(self, n: int) -> MeasurableSubset:
        for e in self.entries:
            if e.n == n:
                return e.witness
        raise KeyError(n)

    def revalidate(self, fam: SequenceFamily) -> float:
        """Largest discrepancy between stored numbers and a fresh recomputation."""
        worst = 0.0
        for e in self.entries:
            f, g = fam.pair(e.n)
            val = integrate_p(f, g, self.p, e.witness)
            worst = max(worst, abs(float(val) - float(e.trimmed_integral)))
            worst = max(worst, abs(float(e.witness.complement().measure - e.complement_measure)))
        return worst


@dataclass(frozen=True)
class ExceptionalSetCertificate:
    """A single set ``E`` with ``mu(E) < delta`` off which the tail integrals decay."""

    delta: Real
    start: int
    exceptional_set: MeasurableSubset
    tail: StatSeries
    trend: Trend


@dataclass(frozen=True)
class CandidateOutcome:
    budget: Fraction
    exceptional_set: MeasurableSubset
    trend: Trend


@dataclass(frozen=True)
class ModeReport:
    mode: Mode
    verdict: Verdict
    certificate: object
    horizon: int
    tol: float
    series: tuple[StatSeries, ...] = ()
    raw_verdict: Verdict | None = None
    notes: tuple[str, ...] = ()

    def __post_init__(self):
        if self.raw_verdict is None:
            object.__setattr__(self, "raw_verdict", self.verdict)

    @property
    def holds(self) -> bool:
        return self.verdict is Verdict.HOLDS

    @property
    def fails(self) -> bool:
        return self.verdict is Verdict.FAILS


def by_mode(reports: Sequence[ModeReport]) -> dict[Mode, ModeReport]:
    return {r.mode: r for r in reports}


def verdict_table(reports: Sequence[ModeReport]) -> dict[str, str]:
    return {r.mode.value: r.verdict.value for r in reports}


# ---------------------------------------------------------------------------
# witnesses


def alpha_witness(fam: SequenceFamily, p, delta, horizon: int) -> WitnessReport:
    """Witness sets ``B_n`` = complement of ``{|f_n - f| >= delta}``."""
    p = check_p(p)
    delta = as_real(delta)
    if not delta > 0:
        raise ValueError("delta must be positive")
    entries = []
    for n in range(1, horizon + 1):
        prof = profile(fam, n, p)
        b = prof.superlevel(delta).complement()
        entries.append(WitnessEntry(n, b, prof.deviation(delta), prof.trimmed(delta)))
    return WitnessReport(p, tuple(entries), delta, "superlevel")


def witness_report(fam: SequenceFamily, witness: Callable[[int], MeasurableSubset], p, horizon: int, source="given") -> WitnessReport:
    p = check_p(p)
    entries = []
    for n in range(1, horizon + 1):
        prof = profile(fam, n, p)
        b = witness(n).retruncate(prof.domain)
        entries.append(WitnessEntry(n, b, b.complement().measure, prof.integral_on(b)))
    return WitnessReport(p, tuple(entries), None, source)


def witness_verdict(
    fam: SequenceFamily,
    witness: Callable[[int], MeasurableSubset],
    p,
    horizon: int,
    criterion: DecayCriterion = DecayCriterion(),
) -> ModeReport:
    """alpha_p verdict backed by a given witness sequence: HOLDS or UNDETERMINED.

    One failing witness sequence says nothing about other witnesses, so this
    never certifies failure.
    """
    rep = witness_report(fam, witness, p, horizon)
    comp, trim = rep.complement_series(), rep.trimmed_series()
    ok = criterion.decays(comp, horizon) and criterion.decays(trim, horizon)
    return ModeReport(
        Mode.ALPHA_P,
        Verdict.HOLDS if ok else Verdict.UNDETERMINED,
        rep,
        horizon,
        criterion.tol,
        (comp, trim),
    )


# ---------------------------------------------------------------------------
# individual modes


def _lp_report(fam, p, horizon, criterion) -> ModeReport:
    s = lp_stat(fam, p, horizon)
    t = criterion.judge(s, horizon)
    v = Verdict.HOLDS if t.decays else Verdict.FAILS if t.persists else Verdict.UNDETERMINED
    return ModeReport(Mode.LP, v, {"trend": t}, horizon, criterion.tol, (s,))


def _measure_report(fam, p, horizon, criterion, grid) -> ModeReport:
    series = [deviation_stat(fam, d, horizon, p) for d in grid]
    trends = [criterion.judge(s, horizon) for s in series]
    if all(t.decays for t in trends):
        v, cert = Verdict.HOLDS, {"trends": dict(zip(grid, trends))}
    else:
        bad = next((d for d, t in zip(grid, trends) if t.persists), None)
        if bad is not None:
            v, cert = Verdict.FAILS, {"delta": bad, "trend": trends[list(grid).index(bad)]}
        else:
            v, cert = Verdict.UNDETERMINED, {"trends": dict(zip(grid, trends))}
    return ModeReport(Mode.MEASURE, v, cert, horizon, criterion.tol, tuple(series))


def _alpha_report(fam, p, horizon, criterion, grid, measure: ModeReport) -> ModeReport:
    series = [trimmed_stat(fam, p, d, horizon) for d in grid]
    trends = [criterion.judge(s, horizon) for s in series]
    if measure.verdict is Verdict.FAILS:
        return ModeReport(Mode.ALPHA_P, Verdict.FAILS, {"reason": "measure fails", "measure": measure.certificate}, horizon, criterion.tol, tuple(series))
    if measure.verdict is Verdict.HOLDS:
        good = next((d for d, t in zip(grid, trends) if t.decays), None)
        if good is not None:
            return ModeReport(Mode.ALPHA_P, Verdict.HOLDS, alpha_witness(fam, p, good, horizon), horizon, criterion.tol, tuple(series))
        if all(t.persists for t in trends):
            cert = {"reason": "trimmed integrals persist for every delta", "trends": dict(zip(grid, trends))}
            return ModeReport(Mode.ALPHA_P, Verdict.FAILS, cert, horizon, criterion.tol, tuple(series))
    return ModeReport(Mode.ALPHA_P, Verdict.UNDETERMINED, {"trends": dict(zip(grid, trends))}, horizon, criterion.tol, tuple(series))


def exceptional_set(witnesses: WitnessReport, delta) -> tuple[int, MeasurableSubset] | None:
    """Least ``N0`` with ``mu(complement(B_N0 & ... & B_N)) < delta``, and that complement.

    Uses every index up to the report's horizon (no subsequence).
    """
    running = None
    best = None
    for e in reversed(witnesses.entries):
        cand = e.witness if running is None else intersect_all([running, e.witness])
        comp = cand.complement()
        if comp.measure >= delta:
            break
        running, best = cand, (e.n, comp)
    return best


def tail_series(fam: SequenceFamily, p, e: MeasurableSubset, indices) -> StatSeries:
    """Integrals of ``|f_n - f|^p`` off the set ``e``."""
    keep = e.complement()
    vals = []
    for n in indices:
        vals.append((n, profile(fam, n, p).integral_on(keep)))
    return StatSeries("tail", tuple(vals), {"p": p})


def _windows(criterion: DecayCriterion, horizon: int) -> list[int]:
    lo, hi = criterion.window(horizon)
    idx = set(range(lo, hi + 1))
    if horizon >= 2:
        elo, ehi = criterion.window(horizon // 2)
        idx.update(range(elo, ehi + 1))
    return sorted(idx)


CANDIDATE_LEVELS = 8


def _almost_report(fam, p, horizon, criterion, grid, alpha: ModeReport, lp: ModeReport | None = None) -> ModeReport:
    delta0 = min(grid)
    notes = []
    if lp is not None and lp.verdict is Verdict.HOLDS:
        # the empty exceptional set already works
        empty = MeasurableSubset.empty(fam.domain_for(1))
        s = lp.series[0]
        cert = ExceptionalSetCertificate(delta0, 1, empty, s, lp.certificate["trend"])
        return ModeReport(Mode.ALMOST_LP, Verdict.HOLDS, cert, horizon, criterion.tol, (s,), notes=("empty exceptional set",))
    if alpha.verdict is Verdict.HOLDS:
        found = exceptional_set(alpha.certificate, delta0)
        if found is not None:
            start, e = found
            tail = tail_series(fam, p, e, range(1, horizon + 1))
            trend = criterion.judge(tail, horizon)
            if trend.decays:
                cert = ExceptionalSetCertificate(delta0, start, e, tail, trend)
                return ModeReport(Mode.ALMOST_LP, Verdict.HOLDS, cert, horizon, criterion.tol, (tail,))
            notes.append("constructed exceptional set does not certify decay")
        else:
            notes.append("no tail intersection of witnesses has small enough complement")

    # failure: every candidate exceptional set leaves a persistent tail
    idx = _windows(criterion, horizon)
    lo, hi = criterion.window(horizon)
    worst = window_max_profile(fam, p, range(lo, hi + 1))
    budgets = [Fraction(0)] + [Fraction(delta0) / 2**j for j in range(1, CANDIDATE_LEVELS + 1)]
    outcomes = []
    for b in budgets:
        e, _ = worst_small_set_cells(worst.domain, worst.cells, worst.mags, p, min(b, worst.domain.measure))
        trend = criterion.judge(tail_series(fam, p, e, idx), horizon)
        outcomes.append(CandidateOutcome(b, e, trend))
        if not trend.persists:
            break
    if all(o.trend.persists for o in outcomes):
        return ModeReport(Mode.ALMOST_LP, Verdict.FAILS, {"delta": delta0, "candidates": outcomes}, horizon, criterion.tol, (), notes=tuple(notes))
    return ModeReport(Mode.ALMOST_LP, Verdict.UNDETERMINED, {"delta": delta0, "candidates": outcomes}, horizon, criterion.tol, (), notes=tuple(notes))


# ---------------------------------------------------------------------------
# the lattice fold


def lattice_violations(reports: Sequence[ModeReport], raw: bool = False) -> list[tuple[Mode, Mode]]:
    """Pairs (stronger, weaker) with stronger HOLDS and weaker FAILS."""
    v = {r.mode: (r.raw_verdict if raw else r.verdict) for r in reports}
    out = []
    for i, strong in enumerate(CHAIN):
        for weak in CHAIN[i + 1 :]:
            if v.get(strong) is Verdict.HOLDS and v.get(weak) is Verdict.FAILS:
                out.append((strong, weak))
    return out


def reconcile(reports: Sequence[ModeReport]) -> list[ModeReport]:
    """Fold verdicts until they respect the implication chain.

    A HOLDS above a FAILS means the horizon cannot separate the two, so both
    become UNDETERMINED.  HOLDS for almost_Lp or alpha_p also needs HOLDS one
    step down, since each is certified through the weaker mode.  Finally an
    undetermined mode above a certified failure fails too.
    """
    cur = {r.mode: r for r in reports}

    def demote(mode: Mode, why: str):
        r = cur[mode]
        cur[mode] = replace(r, verdict=Verdict.UNDETERMINED, notes=r.notes + (why,))

    changed = True
    while changed:
        changed = False
        for strong, weak in lattice_violations(list(cur.values())):
            demote(strong, f"{weak.value} fails at this horizon")
            demote(weak, f"{strong.value} holds at this horizon")
            changed = True
        for upper, lower in ((Mode.ALMOST_LP, Mode.ALPHA_P), (Mode.ALPHA_P, Mode.MEASURE)):
            if upper in cur and lower in cur and cur[upper].holds and not cur[lower].holds:
                demote(upper, f"{lower.value} is not certified")
                changed = True
    # a certified failure of a weaker mode is a failure of every stronger one
    for i, strong in enumerate(CHAIN):
        r = cur.get(strong)
        if r is None or r.verdict is not Verdict.UNDETERMINED:
            continue
        failed = [w for w in CHAIN[i + 1 :] if w in cur and cur[w].fails]
        if failed:
            cur[strong] = replace(r, verdict=Verdict.FAILS, notes=r.notes + (f"implied by {failed[0].value} failing",))
    return [cur[m] for m in CHAIN if m in cur]


def verdict(
    fam: SequenceFamily,
    p,
    horizon: int = DEFAULT_HORIZON,
    criterion: DecayCriterion = DecayCriterion(),
    delta_grid: Sequence = DEFAULT_DELTA_GRID,
) -> list[ModeReport]:
    """Reports for Lp, almost_Lp, alpha_p and measure, strongest first."""
    grid = sorted(as_real(d) for d in delta_grid)
    if not grid:
        raise ValueError("delta grid must not be empty")
    if any(not d > 0 for d in grid):
        raise ValueError("delta grid entries must be positive")
    if horizon < 8:
        raise ValueError("verdicts need a horizon of at least 8")
    p = check_p(p)
    lp = _lp_report(fam, p, horizon, criterion)
    meas = _measure_report(fam, p, horizon, criterion, grid)
    alpha = _alpha_report(fam, p, horizon, criterion, grid, meas)
    almost = _almost_report(fam, p, horizon, criterion, grid, alpha, lp)
    return reconcile([lp, almost, alpha, meas])


def lp_characterization(
    fam: SequenceFamily,
    p,
    horizon: int = DEFAULT_HORIZON,
    criterion: DecayCriterion = DecayCriterion(),
    delta_grid: Sequence = DEFAULT_DELTA_GRID,
) -> dict:
    """Lp decay against (alpha_p certificate and decaying worst-small-set mass).

    The small sets have measure ``mu(B_n^c)`` for the alpha_p witnesses.
    """
    p = check_p(p)
    reports = by_mode(verdict(fam, p, horizon, criterion, delta_grid))
    lp_decays = criterion.decays(reports[Mode.LP].series[0], horizon)
    alpha = reports[Mode.ALPHA_P]
    wss_decays = None
    wss = None
    if alpha.holds:
        vals = []
        for e in alpha.certificate.entries:
            prof = profile(fam, e.n, p)
            budget = min(e.complement_measure, prof.domain.measure)
            vals.append((e.n, worst_small_set_cells(prof.domain, prof.cells, prof.mags, p, budget)[1]))
        wss = StatSeries("worst_small_set", tuple(vals), {"p": p})
        wss_decays = criterion.decays(wss, horizon)
    rhs = bool(alpha.holds and wss_decays)
    return {"lp_decays": lp_decays, "alpha_holds": alpha.holds, "small_set_decays": wss_decays, "series": wss, "consistent": lp_decays == rhs}


__all__ = [
    "Mode",
    "Verdict",
    "CHAIN",
    "WitnessEntry",
    "WitnessReport",
    "ExceptionalSetCertificate",
    "CandidateOutcome",
    "ModeReport",
    "alpha_witness",
    "witness_report",
    "witness_verdict",
    "exceptional_set",
    "tail_series",
    "verdict",
    "reconcile",
    "lattice_violations",
    "lp_characterization",
    "by_mode",
    "verdict_table",
]

