"""Exact scalar arithmetic for simple-function values.

Cell values are one of three kinds:

* ``Fraction`` -- exact rationals,
* ``Surd`` -- numbers ``a + c * r**(1/q)`` with rational ``a, c, r`` and
  integer ``q``, which is what ``n**(1/p)`` and ``2**(k/p)`` look like,
* ``float`` -- everything else.

Arithmetic stays exact whenever the result is again representable and falls
back to ``float`` otherwise.  Comparisons between exact values are exact.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational
from typing import Union

Real = Union[Fraction, "Surd", float]

# exponents with larger denominators are treated as floating point
MAX_EXPONENT_DENOMINATOR = 1000


def iroot(n: int, k: int) -> int | None:
    """Exact integer k-th root of ``n >= 0``, or None if ``n`` is not a k-th power."""
    if n < 0:
        raise ValueError("iroot of a negative integer")
    if n in (0, 1) or k == 1:
        return n
    guess = int(round(n ** (1.0 / k))) if n.bit_length() <= 52 else _newton_root(n, k)
    for cand in (guess - 1, guess, guess + 1):
        if cand >= 0 and cand**k == n:
            return cand
    return None


def _newton_root(n: int, k: int) -> int:
    x = 1 << ((n.bit_length() + k - 1) // k)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            return x
        x = y


def _rational_root(x: Fraction, k: int) -> Fraction | None:
    num = iroot(x.numerator, k)
    if num is None:
        return None
    den = iroot(x.denominator, k)
    if den is None:
        return None
    return Fraction(num, den)


def exact_exponent(p) -> Fraction | None:
    """Return ``p`` as a Fraction when it has a small denominator."""
    if isinstance(p, Surd):
        return None
    try:
        frac = Fraction(p)
    except (TypeError, ValueError):
        return None
    if frac.denominator > MAX_EXPONENT_DENOMINATOR:
        return None
    return frac


def rational_power(x: Fraction, e: Fraction) -> Fraction | Surd:
    """``x**e`` for rational ``x >= 0`` and rational exponent, exactly."""
    if x < 0:
        raise ValueError("rational_power needs a nonnegative base")
    if x == 0:
        if e < 0:
            raise ZeroDivisionError("0 to a negative power")
        return Fraction(0) if e > 0 else Fraction(1)
    u, v = e.numerator, e.denominator
    base = x**u
    return Surd.make(0, 1, base, v)


class Surd:
    """Exact real number ``rational + coef * radicand**(1/index)``.

    Instances are always irrational: ``make`` collapses anything that is
    rational to a ``Fraction``.
    """

    __slots__ = ("rational", "coef", "radicand", "index")

    def __init__(self, rational: Fraction, coef: Fraction, radicand: Fraction, index: int):
        self.rational = rational
        self.coef = coef
        self.radicand = radicand
        self.index = index

    @classmethod
    def make(cls, rational, coef, radicand, index: int) -> Fraction | Surd:
        a, c, r = Fraction(rational), Fraction(coef), Fraction(radicand)
        if index < 1:
            raise ValueError("root index must be a positive integer")
        if r < 0:
            raise ValueError("negative radicand")
        if c == 0 or r == 0:
            return a
        if r == 1:
            return a + c
        q = index
        # reduce r**(1/q) as far as perfect powers allow
        changed = True
        while changed and q > 1:
            changed = False
            for d in range(q, 1, -1):
                if q % d:
                    continue
                root = _rational_root(r, d)
                if root is not None:
                    r, q = root, q // d
                    changed = True
                    break
        if q == 1:
            return a + c * r
        return cls(a, c, r, q)

    # -- conversions -------------------------------------------------
    def __float__(self) -> float:
        r = float(self.radicand)
        if 1e-300 < r < 1e300:
            root = r ** (1.0 / self.index)
        else:
            num, den = self.radicand.numerator, self.radicand.denominator
            root = math.exp((math.log(num) - math.log(den)) / self.index)
        return float(self.rational) + float(self.coef) * root

    def __repr__(self) -> str:
        parts = []
        if self.rational:
            parts.append(f"{self.rational}")
        parts.append(f"{self.coef}*({self.radicand})^(1/{self.index})")
        return "Surd(" + " + ".join(parts) + ")"

    def _same_root(self, other: Surd) -> bool:
        return self.radicand == other.radicand and self.index == other.index

    # -- arithmetic --------------------------------------------------
    def __add__(self, other):
        if isinstance(other, (int, Rational)):
            return Surd.make(self.rational + other, self.coef, self.radicand, self.index)
        if isinstance(other, Surd):
            if self._same_root(other):
                return Surd.make(self.rational + other.rational, self.coef + other.coef, self.radicand, self.index)
            return float(self) + float(other)
        if isinstance(other, float):
            return float(self) + other
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return Surd(-self.rational, -self.coef, self.radicand, self.index)

    def __pos__(self):
        return self

    def __sub__(self, other):
        if isinstance(other, (int, Rational, Surd, float)):
            return self + (-other)
        return NotImplemented

    def __rsub__(self, other):
        if isinstance(other, (int, Rational, float)):
            return (-self) + other
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, (int, Rational)):
            other = Fraction(other)
            return Surd.make(self.rational * other, self.coef * other, self.radicand, self.index)
        if isinstance(other, Surd):
            if self._same_root(other) and self.index == 2:
                a, c, a2, c2 = self.rational, self.coef, other.rational, other.coef
                return Surd.make(a * a2 + c * c2 * self.radicand, a * c2 + a2 * c, self.radicand, 2)
            if self.rational == 0 and other.rational == 0 and self.index == other.index:
                return Surd.make(0, self.coef * other.coef, self.radicand * other.radicand, self.index)
            return float(self) * float(other)
        if isinstance(other, float):
            return float(self) * other
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Rational)):
            return self * (1 / Fraction(other))
        if isinstance(other, (Surd, float)):
            return float(self) / float(other)
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, (int, Rational)) and self.rational == 0:
            # other / (c r^(1/q)) = (other/c) * (1/r)^(1/q)
            return Surd.make(0, Fraction(other) / self.coef, 1 / self.radicand, self.index)
        if isinstance(other, (int, Rational, float)):
            return float(other) / float(self)
        return NotImplemented

    def __abs__(self):
        return -self if self.sign() < 0 else self

    # -- comparison --------------------------------------------------
    def sign(self) -> int:
        return _cmp(self, Fraction(0))

    def __eq__(self, other):
        if isinstance(other, (int, Rational, float)):
            return _cmp(self, other) == 0
        if isinstance(other, Surd):
            return (self.rational, self.coef, self.radicand, self.index) == (
                other.rational,
                other.coef,
                other.radicand,
                other.index,
            )
        return NotImplemented

    def __hash__(self):
        return hash((self.rational, self.coef, self.radicand, self.index))

    def __lt__(self, other):
        c = _cmp(self, other)
        return NotImplemented if c is NotImplemented else c < 0

    def __le__(self, other):
        c = _cmp(self, other)
        return NotImplemented if c is NotImplemented else c <= 0

    def __gt__(self, other):
        c = _cmp(self, other)
        return NotImplemented if c is NotImplemented else c > 0

    def __ge__(self, other):
        c = _cmp(self, other)
        return NotImplemented if c is NotImplemented else c >= 0


def _cmp_root(c: Fraction, r: Fraction, q: int, t: Fraction) -> int:
    """Sign of ``c * r**(1/q) - t`` for ``r > 0``."""
    if c > 0:
        if t <= 0:
            return 1
        lhs, rhs = c**q * r, t**q
        return (lhs > rhs) - (lhs < rhs)
    if t >= 0:
        return -1
    lhs, rhs = (-c) ** q * r, (-t) ** q
    return (rhs > lhs) - (rhs < lhs)


def _cmp(x: Surd, other) -> int:
    if isinstance(other, float):
        if math.isnan(other):
            raise ValueError("comparison with NaN")
        if math.isinf(other):
            return -1 if other > 0 else 1
        other = Fraction(other)
    if isinstance(other, (int, Rational)):
        return _cmp_root(x.coef, x.radicand, x.index, Fraction(other) - x.rational)
    if isinstance(other, Surd):
        if x._same_root(other):
            dc = x.coef - other.coef
            da = other.rational - x.rational
            if dc == 0:
                return (da < 0) - (da > 0)
            return _cmp_root(dc, x.radicand, x.index, da)
        a, b = float(x), float(other)
        return (a > b) - (a < b)
    return NotImplemented


def is_exact(x) -> bool:
    return isinstance(x, (Fraction, Surd, int))


def as_real(x) -> Real:
    """Normalise user input to a cell value type."""
    if isinstance(x, (Fraction, Surd, float)):
        if isinstance(x, float) and not math.isfinite(x):
            raise ValueError(f"non-finite value {x!r}")
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not real values")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"unsupported value type {type(x).__name__}")


def to_float(x) -> float:
    return float(x)


def abs_pow(x: Real, p) -> Fraction | float:
    """``|x|**p``: exact rational when possible, float otherwise."""
    e = exact_exponent(p)
    if isinstance(x, Fraction) and e is not None:
        val = rational_power(abs(x), e)
        return val if isinstance(val, Fraction) else float(val)
    if isinstance(x, Surd) and e is not None and x.rational == 0:
        c = abs(x.coef)
        left = rational_power(c, e)
        right = rational_power(x.radicand, e / x.index)
        if isinstance(left, Fraction) and isinstance(right, Fraction):
            return left * right
        return float(left) * float(right)
    return abs(float(x)) ** float(p)


def simplest_rational(lo: Fraction, hi: Fraction) -> Fraction:
    """The rational with the smallest denominator in ``[lo, hi]``."""
    lo, hi = Fraction(lo), Fraction(hi)
    if lo > hi:
        raise ValueError("empty interval")
    if lo <= 0 <= hi:
        return Fraction(0)
    if hi < 0:
        return -simplest_rational(-hi, -lo)
    fl = math.floor(lo)
    if fl == lo:
        return lo
    if fl + 1 <= hi:
        return Fraction(fl + 1)
    return fl + 1 / simplest_rational(1 / (hi - fl), 1 / (lo - fl))
