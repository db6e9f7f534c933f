"""Sequence families: the objects whose convergence is diagnosed.

A family bundles a generator ``n -> f_n``, an optional limit ``f`` and,
when one is known, a canonical witness sequence ``n -> B_n``.  Terms are
computed lazily and memoised, so a family may be queried at any horizon.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .exact import Real, abs_pow, as_real, exact_exponent, rational_power
from .measure_space import (
    Domain,
    DomainMismatchError,
    MeasurableSubset,
    SimpleFunction,
    UNIT,
    intersect_all,
)

Generator = Callable[[int], SimpleFunction]
WitnessFn = Callable[[int], MeasurableSubset]

GALLERY_NAMES = ("spike", "spread", "typewriter", "constant")


def check_p(p) -> Fraction | float:
    """Normalise an exponent; rationals with small denominators stay exact."""
    e = exact_exponent(p)
    if e is None:
        e = float(p)
    if e < 1:
        raise ValueError(f"exponent p must be >= 1, got {p}")
    return e


def root_of(n: int, p) -> Real:
    """``n ** (1/p)``, exact when ``p`` is rational."""
    e = exact_exponent(p)
    if e is None:
        return float(n) ** (1.0 / float(p))
    return rational_power(Fraction(n), 1 / e)


@dataclass(frozen=True)
class TypewriterIndex:
    k: int
    j: int

    def __post_init__(self):
        if self.k < 0 or not 0 <= self.j < 2**self.k:
            raise ValueError(f"invalid typewriter index ({self.k}, {self.j})")

    @property
    def n(self) -> int:
        return 2**self.k + self.j

    def block(self) -> tuple[Fraction, Fraction]:
        """The dyadic interval ``[j/2^k, (j+1)/2^k)``."""
        w = Fraction(1, 2**self.k)
        return self.j * w, (self.j + 1) * w


def typewriter_index(n: int) -> TypewriterIndex:
    if n < 1:
        raise ValueError("typewriter indices start at 1")
    k = n.bit_length() - 1
    return TypewriterIndex(k, n - 2**k)


@dataclass(eq=False)
class SequenceFamily:
    """Lazy family ``n -> f_n`` with optional limit and canonical witnesses.

    ``limit`` may live on any truncation of a half-line; ``limit_at(n)``
    re-truncates it to ``domain_for(n)``.
    """

    name: str
    p_hint: Fraction | float
    generator: Generator
    limit: SimpleFunction | None = None
    canonical_witness: WitnessFn | None = None
    domain_fn: Callable[[int], Domain] | None = None
    meta: dict = field(default_factory=dict)
    _terms: dict = field(default_factory=dict, repr=False)
    _witnesses: dict = field(default_factory=dict, repr=False)

    def term(self, n: int) -> SimpleFunction:
        if n < 1:
            raise ValueError("families are indexed from 1")
        f = self._terms.get(n)
        if f is None:
            f = self.generator(n)
            self._terms[n] = f
        return f

    __getitem__ = term

    def domain_for(self, n: int) -> Domain:
        if self.domain_fn is not None:
            return self.domain_fn(n)
        dom = self.term(n).domain
        if self.limit is not None and dom.is_halfline and self.limit.domain.right > dom.right:
            return self.limit.domain
        return dom

    @property
    def has_limit(self) -> bool:
        return self.limit is not None

    @property
    def has_witness(self) -> bool:
        return self.canonical_witness is not None

    def f_at(self, n: int) -> SimpleFunction:
        """``f_n`` written on ``domain_for(n)``."""
        return self.term(n).on_domain(self.domain_for(n))

    def limit_at(self, n: int) -> SimpleFunction:
        if self.limit is None:
            raise ValueError(f"family {self.name!r} has no limit")
        return self.limit.on_domain(self.domain_for(n))

    def witness(self, n: int) -> MeasurableSubset:
        if self.canonical_witness is None:
            raise ValueError(f"family {self.name!r} carries no canonical witness")
        b = self._witnesses.get(n)
        if b is None:
            b = self.canonical_witness(n).retruncate(self.domain_for(n))
            self._witnesses[n] = b
        return b

    def pair(self, n: int) -> tuple[SimpleFunction, SimpleFunction]:
        return self.f_at(n), self.limit_at(n)

    def with_limit(self, limit: SimpleFunction | None, name: str | None = None) -> SequenceFamily:
        return SequenceFamily(
            name or self.name, self.p_hint, self.term, limit, self.canonical_witness, self.domain_fn, dict(self.meta)
        )

    def with_witness(self, witness: WitnessFn | None) -> SequenceFamily:
        return SequenceFamily(self.name, self.p_hint, self.term, self.limit, witness, self.domain_fn, dict(self.meta))

    def subsequence(self, indices: Sequence[int], name: str | None = None) -> SequenceFamily:
        """The family ``n -> f_{k_n}`` for an increasing index list (1-based n)."""
        idx = list(indices)
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError("subsequence indices must increase strictly")

        def pick(n: int) -> int:
            if not 1 <= n <= len(idx):
                raise IndexError(f"subsequence has {len(idx)} terms")
            return idx[n - 1]

        wit = None if self.canonical_witness is None else (lambda n: self.witness(pick(n)))
        dom = lambda n: self.domain_for(pick(n))  # noqa: E731
        return SequenceFamily(
            name or f"{self.name}[sub]", self.p_hint, lambda n: self.term(pick(n)), self.limit, wit, dom,
            {**self.meta, "indices": idx},
        )

    def map(self, fn: Callable[[Real], Real], name: str) -> SequenceFamily:
        """Compose every term and the limit with a scalar map."""
        lim = None if self.limit is None else self.limit.map(fn)
        return SequenceFamily(
            name, self.p_hint, lambda n: self.term(n).map(fn), lim, self.canonical_witness, self.domain_fn,
            dict(self.meta),
        )


def from_terms(
    name: str,
    terms: Sequence[SimpleFunction],
    limit: SimpleFunction | None,
    p_hint=1,
    witnesses: Sequence[MeasurableSubset] | None = None,
) -> SequenceFamily:
    """Family from an explicit finite list of terms (horizon = ``len(terms)``)."""
    terms = list(terms)

    def gen(n: int) -> SimpleFunction:
        if not 1 <= n <= len(terms):
            raise IndexError(f"family {name!r} is tabulated only up to n = {len(terms)}")
        return terms[n - 1]

    wit = None
    if witnesses is not None:
        wl = list(witnesses)
        wit = lambda n: wl[n - 1]  # noqa: E731
    return SequenceFamily(name, check_p(p_hint), gen, limit, wit, meta={"tabulated": len(terms)})


# ---------------------------------------------------------------------------
# the example gallery


def _spike(p) -> SequenceFamily:
    def gen(n: int) -> SimpleFunction:
        return SimpleFunction.indicator(UNIT, 0, Fraction(1, n), root_of(n, p))

    def wit(n: int) -> MeasurableSubset:
        return MeasurableSubset.interval(UNIT, Fraction(1, n), 1)

    return SequenceFamily("spike", p, gen, SimpleFunction.zero(UNIT), wit)


def _spread(p) -> SequenceFamily:
    def gen(n: int) -> SimpleFunction:
        return SimpleFunction.indicator(Domain.halfline(n), 0, n, 1 / root_of(n, p))

    return SequenceFamily(
        "spread", p, gen, SimpleFunction.zero(Domain.halfline(1)), None, lambda n: Domain.halfline(n)
    )


def _typewriter(p) -> SequenceFamily:
    def gen(n: int) -> SimpleFunction:
        t = typewriter_index(n)
        a, b = t.block()
        return SimpleFunction.indicator(UNIT, a, b, root_of(2**t.k, p))

    def wit(n: int) -> MeasurableSubset:
        a, b = typewriter_index(n).block()
        return MeasurableSubset.interval(UNIT, a, b).complement()

    return SequenceFamily("typewriter", p, gen, SimpleFunction.zero(UNIT), wit)


CONSTANT_LIMIT = SimpleFunction.from_steps(UNIT, (0, Fraction(1, 3), Fraction(1, 2), 1), (1, Fraction(-1, 2), 2))


def _constant(p) -> SequenceFamily:
    return SequenceFamily(
        "constant", p, lambda n: CONSTANT_LIMIT, CONSTANT_LIMIT, lambda n: MeasurableSubset.full(UNIT)
    )


def gallery(name: str, p=1) -> SequenceFamily:
    """One of the worked example families, calibrated to exponent ``p``."""
    p = check_p(p)
    builders = {"spike": _spike, "spread": _spread, "typewriter": _typewriter, "constant": _constant}
    try:
        return builders[name](p)
    except KeyError:
        raise ValueError(f"unknown gallery family {name!r}; choose from {', '.join(GALLERY_NAMES)}") from None


def zero_family(domain: Domain = UNIT, p=1) -> SequenceFamily:
    z = SimpleFunction.zero(domain)
    return SequenceFamily("zero", check_p(p), lambda n: z, z, lambda n: MeasurableSubset.full(domain))


def combine(fam1: SequenceFamily, fam2: SequenceFamily, a, b) -> SequenceFamily:
    """``n -> a*f_n + b*g_n`` with witnesses ``B_n & D_n`` when both exist."""
    if fam1.p_hint != fam2.p_hint:
        raise ValueError("combined families must share p")
    d1, d2 = fam1.domain_for(1), fam2.domain_for(1)
    if not d1.same_space(d2):
        raise DomainMismatchError(f"cannot combine families on {d1} and {d2}")
    a, b = as_real(a), as_real(b)

    def dom(n: int) -> Domain:
        return max(fam1.domain_for(n), fam2.domain_for(n), key=lambda d: d.right)

    def gen(n: int) -> SimpleFunction:
        d = dom(n)
        return fam1.term(n).on_domain(d) * a + fam2.term(n).on_domain(d) * b

    lim = None
    if fam1.has_limit and fam2.has_limit:
        lim = fam1.limit * a + fam2.limit * b if fam1.limit.domain == fam2.limit.domain else _combine_limits(fam1, fam2, a, b)
    wit = None
    if fam1.has_witness and fam2.has_witness:
        wit = lambda n: intersect_all([fam1.witness(n), fam2.witness(n)]).retruncate(dom(n))  # noqa: E731
    name = f"{_coef(a)}{fam1.name}+{_coef(b)}{fam2.name}"
    return SequenceFamily(name, fam1.p_hint, gen, lim, wit, dom, {"parts": (fam1.name, fam2.name), "coefficients": (a, b)})


def _combine_limits(fam1, fam2, a, b) -> SimpleFunction:
    widest = max(fam1.limit.domain, fam2.limit.domain, key=lambda d: d.right)
    return fam1.limit.on_domain(widest) * a + fam2.limit.on_domain(widest) * b


def _coef(x) -> str:
    return "" if x == 1 else f"({x})*"


def trimmed_bound(a, b, p, t1, t2) -> Real:
    """Right-hand side of the linearity inequality ``2^(p-1)(|a|^p t1 + |b|^p t2)``."""
    w = abs_pow(Fraction(2), p - 1) if exact_exponent(p) is not None else 2.0 ** (float(p) - 1)
    return w * (abs_pow(as_real(a), p) * t1 + abs_pow(as_real(b), p) * t2)


def pointwise_family(name: str, p, domain: Domain, values: Callable[[int], Iterable], breakpoints, limit=None) -> SequenceFamily:
    """Family on a fixed partition whose cell values depend on ``n``."""
    bps = tuple(breakpoints)

    def gen(n: int) -> SimpleFunction:
        return SimpleFunction.from_steps(domain, bps, tuple(values(n)))

    return SequenceFamily(name, check_p(p), gen, limit)


__all__ = [
    "SequenceFamily",
    "TypewriterIndex",
    "typewriter_index",
    "gallery",
    "combine",
    "zero_family",
    "from_terms",
    "root_of",
    "check_p",
    "trimmed_bound",
    "pointwise_family",
    "GALLERY_NAMES",
    "CONSTANT_LIMIT",
]

