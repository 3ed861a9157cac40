"""Shared random generators for the test suite (seeded, reproducible)."""

from __future__ import annotations

import random
from fractions import Fraction

from akforms.series import RATIONAL_RING, TruncatedSeries1, TruncatedSeries2


def rand_coeff(rng: random.Random) -> Fraction:
    return Fraction(rng.randint(-9, 9), rng.randint(1, 9))


def rand_series2(rng: random.Random, order: int, terms: int = 12,
                 min_degree: int = 0) -> TruncatedSeries2:
    coeffs = {}
    for _ in range(terms):
        d = rng.randint(min_degree, order)
        i = rng.randint(0, d)
        value = rand_coeff(rng)
        if value:
            coeffs[(i, d - i)] = value
    return TruncatedSeries2(coeffs, order, RATIONAL_RING)


def rand_series1(rng: random.Random, order: int, terms: int = 8,
                 min_degree: int = 0) -> TruncatedSeries1:
    coeffs = {}
    for _ in range(terms):
        e = rng.randint(min_degree, order)
        value = rand_coeff(rng)
        if value:
            coeffs[e] = value
    return TruncatedSeries1(coeffs, order, RATIONAL_RING)


def rand_reduced_residual(rng: random.Random, order: int, k: int,
                          terms: int = 8, unit: bool = False) -> TruncatedSeries1:
    """Random series whose exponents avoid k-1 mod k; unit forces c(0) != 0."""
    coeffs = {}
    for _ in range(terms):
        e = rng.randint(0, order)
        if e % k == k - 1:
            continue
        value = rand_coeff(rng)
        if value:
            coeffs[e] = value
    if unit and coeffs.get(0, 0) == 0:
        coeffs[0] = Fraction(rng.choice([1, 2, 3]), 1)
    return TruncatedSeries1(coeffs, order, RATIONAL_RING)


def rand_flow_generator(rng: random.Random, order: int, max_degree: int = 4
                        ) -> TruncatedSeries2:
    """Random polynomial with valuation >= 1, for flow maps."""
    coeffs = {}
    for _ in range(rng.randint(1, 4)):
        d = rng.randint(1, min(order, max_degree))
        i = rng.randint(0, d)
        value = rand_coeff(rng)
        if value:
            coeffs[(i, d - i)] = value
    if not coeffs:
        coeffs[(1, 0)] = Fraction(1, 2)
    return TruncatedSeries2(coeffs, order, RATIONAL_RING)
