"""Seeded random families shared by the property and acceptance tests."""

from __future__ import annotations

import random
from fractions import Fraction

from modeconv.measure_space import UNIT, MeasurableSubset, SimpleFunction
from modeconv.sequences import SequenceFamily, typewriter_index

KINDS = ("spike", "sweep", "shrink", "fixed", "alternating", "escape")


def random_rational(rng: random.Random, lo=-2, hi=2, den=4) -> Fraction:
    return Fraction(rng.randint(lo * den, hi * den), den)


def random_steps(rng: random.Random, max_cells: int = 8) -> SimpleFunction:
    cells = rng.randint(1, max_cells)
    den = rng.choice((4, 8, 16))
    inner = sorted(rng.sample(range(1, den), min(cells - 1, den - 1)))
    pts = [Fraction(0)] + [Fraction(k, den) for k in inner] + [Fraction(1)]
    vals = [random_rational(rng) for _ in range(len(pts) - 1)]
    return SimpleFunction.from_steps(UNIT, pts, vals)


def _bump(rng: random.Random):
    kind = rng.choice(KINDS)
    c = Fraction(rng.randint(1, 8), 4) * rng.choice((1, -1))
    x0 = Fraction(rng.randint(0, 15), 16)
    height_pow = rng.choice((0, 1, 2, -1))
    width_pow = rng.choice((1, 2))

    def piece(n: int):
        if kind == "spike":
            w = Fraction(1, n**width_pow)
            lo = x0 * (1 - w)
            return lo, lo + w, c * Fraction(n) ** height_pow
        if kind == "sweep":
            lo, hi = typewriter_index(n).block()
            return lo, hi, c * (2 ** typewriter_index(n).k if height_pow > 0 else 1)
        if kind == "shrink":
            return x0 / 2, x0 / 2 + Fraction(1, 2), c / n ** max(height_pow, 1)
        if kind == "fixed":
            return x0 / 2, x0 / 2 + Fraction(1, 4), c
        if kind == "alternating":
            return x0 / 2, x0 / 2 + Fraction(1, 4), c * (-1) ** n
        w = Fraction(1, n**width_pow)
        return 1 - w, Fraction(1), c

    return kind, piece


def random_family(seed: int, max_limit_cells: int = 8, bumps: int | None = None) -> SequenceFamily:
    """Limit plus one or two moving bumps; at most ``max_limit_cells + 4`` cells."""
    rng = random.Random(seed)
    limit = random_steps(rng, max_limit_cells)
    parts = [_bump(rng) for _ in range(bumps or rng.randint(1, 2))]

    def gen(n: int) -> SimpleFunction:
        f = limit
        for _, piece in parts:
            lo, hi, h = piece(n)
            f = f + SimpleFunction.indicator(UNIT, lo, hi, h)
        return f.simplify()

    name = f"random{seed}:" + "+".join(k for k, _ in parts)
    return SequenceFamily(name, 1, gen, limit, None, None, {"seed": seed})


def cauchy_family(seed: int) -> tuple[SequenceFamily, SimpleFunction]:
    """An alpha_p-Cauchy family (without its limit) and the limit it should have.

    The limit has quarter breakpoints and values with denominator at most 4.
    Terms add a shrinking ramp of amplitude at most 1/4 and a tall spike that
    the witness sets cut out; the spike sits inside one limit cell.
    """
    rng = random.Random(10_000 + seed)
    inner = sorted(rng.sample(range(1, 4), rng.randint(0, 3)))
    pts = [Fraction(0)] + [Fraction(k, 4) for k in inner] + [Fraction(1)]
    vals = [Fraction(rng.randint(-8, 8), rng.choice((1, 2, 4))) for _ in range(len(pts) - 1)]
    limit = SimpleFunction.from_steps(UNIT, pts, vals)

    amp = Fraction(rng.randint(1, 4), 16)
    lo_r = Fraction(rng.randint(0, 7), 8)
    anchor = Fraction(rng.choice([1, 3, 5, 7]), 8)  # never a quarter point
    sign = rng.choice((1, -1))

    def spike(n: int) -> tuple[Fraction, Fraction]:
        w = Fraction(1, 16 * n * n)
        return anchor - w, anchor + w

    def gen(n: int) -> SimpleFunction:
        a, b = spike(n)
        ramp = SimpleFunction.indicator(UNIT, lo_r, lo_r + Fraction(1, 8), sign * amp / n)
        return (limit + ramp + SimpleFunction.indicator(UNIT, a, b, n * n)).simplify()

    def wit(n: int) -> MeasurableSubset:
        a, b = spike(n)
        return MeasurableSubset.interval(UNIT, a, b).complement()

    fam = SequenceFamily(f"cauchy{seed}", 1, gen, None, wit, None, {"seed": seed})
    return fam, limit
