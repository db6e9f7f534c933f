"""Interval measure spaces, finite interval unions and simple functions.

Everything here is exact: endpoints are ``Fraction`` and Lebesgue measures
are rational.  Cells are half-open ``[a, b)``; the choice only moves
measure-zero sets around.

A truncated half-line ``[0, T)`` stands for ``[0, inf)`` with every function
vanishing beyond ``T``.  Subsets of such a domain carry ``includes_tail``,
telling whether they also contain ``[T, inf)``; the tail never carries any
integral mass, so measures are reported within the truncation.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Sequence

from .exact import Real, Surd, abs_pow, as_real, exact_exponent

INTERVAL = "interval"
HALFLINE = "halfline"


class DomainMismatchError(ValueError):
    """Two objects that must live on the same domain do not."""


def as_rational(x) -> Fraction:
    """Convert ``int``, ``Fraction``, ``"num/den"`` or decimal strings exactly."""
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, str)):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"non-finite endpoint {x!r}")
        return Fraction(x)
    raise TypeError(f"cannot read {x!r} as a rational")


@dataclass(frozen=True)
class Domain:
    left: Fraction
    right: Fraction
    kind: str = INTERVAL

    def __post_init__(self):
        object.__setattr__(self, "left", as_rational(self.left))
        object.__setattr__(self, "right", as_rational(self.right))
        if self.kind not in (INTERVAL, HALFLINE):
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if not self.left < self.right:
            raise ValueError("domain needs left < right")
        if self.kind == HALFLINE and self.left != 0:
            raise ValueError("a truncated half-line starts at 0")

    @classmethod
    def interval(cls, a, b) -> Domain:
        return cls(a, b, INTERVAL)

    @classmethod
    def halfline(cls, truncation) -> Domain:
        return cls(0, truncation, HALFLINE)

    @property
    def measure(self) -> Fraction:
        return self.right - self.left

    @property
    def is_halfline(self) -> bool:
        return self.kind == HALFLINE

    def same_space(self, other: Domain) -> bool:
        """True when both are truncations of one half-line, or equal intervals."""
        if self.kind != other.kind:
            return False
        return self.is_halfline or self == other


UNIT = Domain.interval(0, 1)


@dataclass(frozen=True)
class Partition:
    domain: Domain
    breakpoints: tuple[Fraction, ...]

    def __post_init__(self):
        pts = tuple(as_rational(b) for b in self.breakpoints)
        object.__setattr__(self, "breakpoints", pts)
        if len(pts) < 2:
            raise ValueError("a partition needs at least two breakpoints")
        if pts[0] != self.domain.left or pts[-1] != self.domain.right:
            raise ValueError("breakpoints must span the domain")
        if any(b <= a for a, b in zip(pts, pts[1:])):
            raise ValueError("breakpoints must be strictly increasing")

    @classmethod
    def trivial(cls, domain: Domain) -> Partition:
        return cls(domain, (domain.left, domain.right))

    @classmethod
    def from_points(cls, domain: Domain, points: Iterable) -> Partition:
        inner = {as_rational(x) for x in points}
        inner = {x for x in inner if domain.left < x < domain.right}
        return cls(domain, (domain.left, *sorted(inner), domain.right))

    @classmethod
    def dyadic(cls, domain: Domain, level: int) -> Partition:
        n = 2**level
        step = domain.measure / n
        return cls(domain, tuple(domain.left + i * step for i in range(n + 1)))

    @property
    def cells(self) -> list[tuple[Fraction, Fraction]]:
        return list(zip(self.breakpoints, self.breakpoints[1:]))

    def __len__(self) -> int:
        return len(self.breakpoints) - 1

    def cell_index(self, x) -> int:
        x = as_rational(x)
        if not self.domain.left <= x < self.domain.right:
            raise ValueError(f"{x} lies outside the domain")
        return bisect_right(self.breakpoints, x) - 1


def _check_same(d1: Domain, d2: Domain):
    if d1 != d2:
        raise DomainMismatchError(f"domains differ: {d1} vs {d2}")


def refine(p1: Partition, p2: Partition) -> Partition:
    """Common refinement: the sorted union of both breakpoint lists."""
    _check_same(p1.domain, p2.domain)
    if p1.breakpoints == p2.breakpoints:
        return p1
    return Partition(p1.domain, tuple(sorted(set(p1.breakpoints) | set(p2.breakpoints))))


# ---------------------------------------------------------------------------
# measurable subsets


def _normalise(intervals: Iterable[tuple], domain: Domain) -> tuple[tuple[Fraction, Fraction], ...]:
    items = sorted((as_rational(a), as_rational(b)) for a, b in intervals)
    out: list[list[Fraction]] = []
    for a, b in items:
        if b <= a:
            continue
        if a < domain.left or b > domain.right:
            raise ValueError(f"interval [{a}, {b}) leaves the domain")
        if out and a <= out[-1][1]:
            out[-1][1] = max(out[-1][1], b)
        else:
            out.append([a, b])
    return tuple((a, b) for a, b in out)


@dataclass(frozen=True)
class MeasurableSubset:
    """Finite disjoint union of half-open rational intervals of a domain."""

    domain: Domain
    intervals: tuple[tuple[Fraction, Fraction], ...] = ()
    includes_tail: bool = False

    def __post_init__(self):
        object.__setattr__(self, "intervals", _normalise(self.intervals, self.domain))
        if self.includes_tail and not self.domain.is_halfline:
            raise ValueError("only half-line subsets can contain the tail")

    @classmethod
    def empty(cls, domain: Domain) -> MeasurableSubset:
        return cls(domain, ())

    @classmethod
    def full(cls, domain: Domain) -> MeasurableSubset:
        return cls(domain, ((domain.left, domain.right),), includes_tail=domain.is_halfline)

    @classmethod
    def interval(cls, domain: Domain, a, b) -> MeasurableSubset:
        return cls(domain, ((a, b),))

    @property
    def measure(self) -> Fraction:
        """Lebesgue measure inside the (truncated) domain."""
        return sum((b - a for a, b in self.intervals), Fraction(0))

    @property
    def is_empty(self) -> bool:
        return not self.intervals and not self.includes_tail

    def complement(self) -> MeasurableSubset:
        pts = [self.domain.left]
        for a, b in self.intervals:
            pts.extend((a, b))
        pts.append(self.domain.right)
        gaps = [(pts[i], pts[i + 1]) for i in range(0, len(pts), 2)]
        return MeasurableSubset(self.domain, gaps, includes_tail=self.domain.is_halfline and not self.includes_tail)

    def intersection(self, other: MeasurableSubset) -> MeasurableSubset:
        _check_same(self.domain, other.domain)
        out = []
        i = j = 0
        A, B = self.intervals, other.intervals
        while i < len(A) and j < len(B):
            lo = max(A[i][0], B[j][0])
            hi = min(A[i][1], B[j][1])
            if lo < hi:
                out.append((lo, hi))
            if A[i][1] < B[j][1]:
                i += 1
            else:
                j += 1
        return MeasurableSubset(self.domain, out, self.includes_tail and other.includes_tail)

    def union(self, other: MeasurableSubset) -> MeasurableSubset:
        _check_same(self.domain, other.domain)
        return MeasurableSubset(self.domain, self.intervals + other.intervals, self.includes_tail or other.includes_tail)

    def difference(self, other: MeasurableSubset) -> MeasurableSubset:
        return self.intersection(other.complement())

    __and__ = intersection
    __or__ = union
    __sub__ = difference

    def issubset(self, other: MeasurableSubset) -> bool:
        return self.difference(other).is_empty

    def contains_interval(self, a, b) -> bool:
        a, b = as_rational(a), as_rational(b)
        return any(x <= a and b <= y for x, y in self.intervals)

    def retruncate(self, domain: Domain) -> MeasurableSubset:
        """Move a half-line subset to another truncation of the same half-line."""
        if domain == self.domain:
            return self
        if not (self.domain.is_halfline and domain.is_halfline):
            raise DomainMismatchError("only half-line subsets can be re-truncated")
        T_old, T_new = self.domain.right, domain.right
        if T_new > T_old:
            extra = [(T_old, T_new)] if self.includes_tail else []
            return MeasurableSubset(domain, self.intervals + tuple(extra), self.includes_tail)
        clipped = [(a, min(b, T_new)) for a, b in self.intervals if a < T_new]
        return MeasurableSubset(domain, clipped, self.includes_tail)

    def breakpoints(self) -> list[Fraction]:
        return [x for ab in self.intervals for x in ab]


def measure(s: MeasurableSubset) -> Fraction:
    return s.measure


def complement(s: MeasurableSubset) -> MeasurableSubset:
    return s.complement()


def intersect_all(sets: Sequence[MeasurableSubset]) -> MeasurableSubset:
    """Intersection of subsets, re-truncating half-line sets to the widest domain."""
    if not sets:
        raise ValueError("nothing to intersect")
    sets = _common_truncation(sets)
    out = sets[0]
    for s in sets[1:]:
        out = out & s
    return out


def unite_all(sets: Sequence[MeasurableSubset]) -> MeasurableSubset:
    if not sets:
        raise ValueError("nothing to unite")
    sets = _common_truncation(sets)
    dom = sets[0].domain
    return MeasurableSubset(dom, [iv for s in sets for iv in s.intervals], any(s.includes_tail for s in sets))


def _common_truncation(sets: Sequence[MeasurableSubset]) -> list[MeasurableSubset]:
    doms = {s.domain for s in sets}
    if len(doms) == 1:
        return list(sets)
    widest = max(doms, key=lambda d: d.right)
    return [s.retruncate(widest) for s in sets]


# ---------------------------------------------------------------------------
# simple functions


@dataclass(frozen=True)
class SimpleFunction:
    """Piecewise-constant function: one value per partition cell."""

    partition: Partition
    values: tuple[Real, ...]
    _cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __post_init__(self):
        vals = tuple(as_real(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if len(vals) != len(self.partition):
            raise ValueError(f"{len(vals)} values for {len(self.partition)} cells")

    # -- constructors ------------------------------------------------
    @classmethod
    def constant(cls, domain: Domain, value=0) -> SimpleFunction:
        return cls(Partition.trivial(domain), (value,))

    @classmethod
    def zero(cls, domain: Domain) -> SimpleFunction:
        return cls.constant(domain, 0)

    @classmethod
    def indicator(cls, domain: Domain, a, b, height=1) -> SimpleFunction:
        """``height`` on ``[a, b)`` and zero elsewhere."""
        a, b = as_rational(a), as_rational(b)
        if not (domain.left <= a < b <= domain.right):
            raise ValueError("indicator support must be a nonempty subinterval")
        part = Partition.from_points(domain, (a, b))
        vals = [height if a <= lo and hi <= b else 0 for lo, hi in part.cells]
        return cls(part, vals)

    @classmethod
    def from_steps(cls, domain: Domain, breakpoints: Sequence, values: Sequence) -> SimpleFunction:
        return cls(Partition(domain, tuple(breakpoints)), tuple(values))

    @classmethod
    def on_subset(cls, s: MeasurableSubset, height=1) -> SimpleFunction:
        part = Partition.from_points(s.domain, s.breakpoints())
        vals = [height if s.contains_interval(lo, hi) else 0 for lo, hi in part.cells]
        return cls(part, vals)

    # -- basic access ------------------------------------------------
    @property
    def domain(self) -> Domain:
        return self.partition.domain

    @property
    def cells(self) -> list[tuple[Fraction, Fraction]]:
        return self.partition.cells

    def __call__(self, x) -> Real:
        return self.values[self.partition.cell_index(x)]

    def refined_to(self, partition: Partition) -> SimpleFunction:
        """The same function written on a finer partition."""
        _check_same(self.domain, partition.domain)
        if partition.breakpoints == self.partition.breakpoints:
            return self
        own = self.partition.breakpoints
        vals = []
        j = 0
        for lo, _ in partition.cells:
            while own[j + 1] <= lo:
                j += 1
            vals.append(self.values[j])
        return SimpleFunction(partition, tuple(vals))

    def simplify(self) -> SimpleFunction:
        """Merge neighbouring cells with equal values."""
        pts = [self.partition.breakpoints[0]]
        vals = [self.values[0]]
        for (lo, _), v in zip(self.cells[1:], self.values[1:]):
            if v == vals[-1]:
                continue
            pts.append(lo)
            vals.append(v)
        pts.append(self.domain.right)
        return SimpleFunction(Partition(self.domain, tuple(pts)), tuple(vals))

    def on_domain(self, domain: Domain) -> SimpleFunction:
        """Re-truncate a half-line function (zero-extend or cut a zero tail)."""
        if domain == self.domain:
            return self
        if not (self.domain.is_halfline and domain.is_halfline):
            raise DomainMismatchError("only half-line functions can be re-truncated")
        T_old, T_new = self.domain.right, domain.right
        if T_new > T_old:
            pts = self.partition.breakpoints + (T_new,)
            return SimpleFunction(Partition(domain, pts), self.values + (Fraction(0),))
        pts, vals = [], []
        for (lo, hi), v in zip(self.cells, self.values):
            if hi > T_new and v != 0:
                raise ValueError("cannot truncate a function that is nonzero beyond the new bound")
            if lo >= T_new:
                continue
            pts.append(lo)
            vals.append(v)
        pts.append(T_new)
        return SimpleFunction(Partition(domain, tuple(pts)), tuple(vals))

    # -- algebra -----------------------------------------------------
    def _binary(self, other: SimpleFunction, op) -> SimpleFunction:
        f, g = align(self, other)
        return SimpleFunction(f.partition, tuple(op(a, b) for a, b in zip(f.values, g.values)))

    def __add__(self, other):
        if isinstance(other, SimpleFunction):
            return self._binary(other, lambda a, b: a + b)
        return self.map(lambda v: v + as_real(other))

    def __sub__(self, other):
        if isinstance(other, SimpleFunction):
            return self._binary(other, lambda a, b: a - b)
        return self.map(lambda v: v - as_real(other))

    def __mul__(self, scalar):
        if isinstance(scalar, SimpleFunction):
            return self._binary(scalar, lambda a, b: a * b)
        s = as_real(scalar)
        return self.map(lambda v: v * s)

    __rmul__ = __mul__

    def __neg__(self):
        return self.map(lambda v: -v)

    def __abs__(self):
        return self.map(abs)

    def map(self, fn: Callable[[Real], Real]) -> SimpleFunction:
        """Compose with a scalar map cellwise (same partition)."""
        return SimpleFunction(self.partition, tuple(fn(v) for v in self.values))

    def sup_abs(self) -> Real:
        return max(abs(v) for v in self.values)


def align(f: SimpleFunction, g: SimpleFunction) -> tuple[SimpleFunction, SimpleFunction]:
    """Write ``f`` and ``g`` on their common refinement."""
    if f.domain != g.domain:
        if f.domain.is_halfline and g.domain.is_halfline:
            widest = max(f.domain, g.domain, key=lambda d: d.right)
            f, g = f.on_domain(widest), g.on_domain(widest)
        else:
            raise DomainMismatchError(f"domains differ: {f.domain} vs {g.domain}")
    part = refine(f.partition, g.partition)
    return f.refined_to(part), g.refined_to(part)


def common_refinement(functions: Sequence[SimpleFunction], extra_points: Iterable = ()) -> Partition:
    domain = functions[0].domain
    pts = set()
    for f in functions:
        _check_same(domain, f.domain)
        pts.update(f.partition.breakpoints)
    pts.update(as_rational(x) for x in extra_points)
    return Partition.from_points(domain, pts)


# ---------------------------------------------------------------------------
# integrals and level sets


def _check_p(p):
    if float(p) < 1:
        raise ValueError(f"exponent p must be >= 1, got {p}")


def cell_masses(d: SimpleFunction, p) -> list[Fraction | float]:
    """``|d|**p * length`` for every cell, exact whenever possible."""
    out = []
    for (lo, hi), v in zip(d.cells, d.values):
        w = abs_pow(v, p)
        out.append(w * (hi - lo) if isinstance(w, Fraction) else w * float(hi - lo))
    return out


def exact_sum(terms: Iterable) -> Fraction | float:
    """Exact sum of rationals; ``math.fsum`` as soon as a float shows up."""
    terms = list(terms)
    if all(isinstance(t, Fraction) for t in terms):
        return sum(terms, Fraction(0))
    return math.fsum(float(t) for t in terms)


def integrate_p(f: SimpleFunction, g: SimpleFunction, p, s: MeasurableSubset | None = None) -> Fraction | float:
    """``int_s |f - g|^p`` over a subset (the whole domain when ``s`` is None).

    Exact rational for rational integrands with rational ``p``; float
    otherwise.
    """
    _check_p(p)
    d = f - g
    if s is None:
        return exact_sum(cell_masses(d, p))
    if s.domain != d.domain:
        if s.domain.is_halfline and d.domain.is_halfline:
            widest = max(s.domain, d.domain, key=lambda x: x.right)
            s, d = s.retruncate(widest), d.on_domain(widest)
        else:
            raise DomainMismatchError("subset and functions live on different domains")
    return _integrate_on(d, p, s)


def _integrate_on(d: SimpleFunction, p, s: MeasurableSubset) -> Fraction | float:
    terms = []
    cells = d.cells
    i = 0
    for a, b in s.intervals:
        while i < len(cells) and cells[i][1] <= a:
            i += 1
        j = i
        while j < len(cells) and cells[j][0] < b:
            lo, hi = max(cells[j][0], a), min(cells[j][1], b)
            if lo < hi:
                w = abs_pow(d.values[j], p)
                terms.append(w * (hi - lo) if isinstance(w, Fraction) else w * float(hi - lo))
            j += 1
    return exact_sum(terms)


def _at_least(v: Real, delta) -> bool:
    return abs(v) >= delta


def superlevel_set(f: SimpleFunction, g: SimpleFunction, delta) -> MeasurableSubset:
    """Union of refined cells where ``|f - g| >= delta``."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    delta = as_real(delta)
    d = f - g
    return MeasurableSubset(d.domain, [c for c, v in zip(d.cells, d.values) if _at_least(v, delta)])


__all__ = [
    "Domain",
    "Partition",
    "MeasurableSubset",
    "SimpleFunction",
    "DomainMismatchError",
    "UNIT",
    "as_rational",
    "refine",
    "measure",
    "complement",
    "integrate_p",
    "superlevel_set",
    "intersect_all",
    "unite_all",
    "align",
    "common_refinement",
    "cell_masses",
    "exact_sum",
    "exact_exponent",
    "Surd",
]
