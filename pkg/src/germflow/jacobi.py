"""Pairs (f, g) with g - f in a power of the gradient ideal of f.

Generative only: membership testing for arbitrary differences is out of
scope. Building g as f + sum(multiplier * generator) over the degree-M
products of the partials of f guarantees the derivative-ratio bounds that
the sampled criteria then confirm numerically.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations_with_replacement

from .condition import (
    ConditionReport,
    SamplingSpec,
    Verdict,
    check_cr_criterion,
    multi_indices_upto,
)
from .germ import Poly, PolyGerm


@dataclass(frozen=True)
class JacobiIdealBasis:
    f: PolyGerm
    partials: tuple

    def __post_init__(self):
        if list(self.partials) != self.f.gradient():
            raise ValueError("partials must be exactly the gradient of f")

    @classmethod
    def of(cls, f: PolyGerm) -> "JacobiIdealBasis":
        return cls(f, tuple(f.gradient()))

    @property
    def n(self) -> int:
        return self.f.n


def _words(n: int, power: int):
    # multisets of partial indices, 1-based, in lexicographic order
    return list(combinations_with_replacement(range(1, n + 1), power))


def generator_count(n: int, power: int) -> int:
    return math.comb(n + power - 1, power)


def ideal_power_generators(basis: JacobiIdealBasis, power: int):
    """Products of ``power`` partials over index multisets, C(n+M-1, M) of them."""
    if power < 1:
        raise ValueError("power must be >= 1")
    gens = []
    for word in _words(basis.n, power):
        p = Poly.constant(basis.n, 1)
        for i in word:
            p = p * basis.partials[i - 1]
        gens.append(p)
    return gens


@dataclass(frozen=True)
class IdealPowerElement:
    """A combination sum(multiplier * product of partials) with its expansion.

    ``terms`` pairs each multiplier with its factor word (1-based partial
    indices); ``assembled`` must equal the expanded sum exactly, which the
    constructor re-derives and checks.
    """

    basis: JacobiIdealBasis
    terms: tuple
    assembled: Poly

    def __post_init__(self):
        total = Poly.zero(self.basis.n)
        for multiplier, word in self.terms:
            p = Poly.constant(self.basis.n, 1)
            for i in word:
                p = p * self.basis.partials[i - 1]
            total = total + multiplier * p
        if total != self.assembled:
            raise ValueError("assembled polynomial does not match the expanded sum")


def assemble_element(basis: JacobiIdealBasis, power: int, multipliers) -> IdealPowerElement:
    words = _words(basis.n, power)
    if len(multipliers) != len(words):
        raise ValueError(
            f"expected {len(words)} multipliers for n={basis.n}, power={power}, "
            f"got {len(multipliers)}"
        )
    n = basis.n
    terms = []
    total = Poly.zero(n)
    for multiplier, word in zip(multipliers, words):
        if not isinstance(multiplier, Poly):
            multiplier = Poly.constant(n, multiplier)
        gen = Poly.constant(n, 1)
        for i in word:
            gen = gen * basis.partials[i - 1]
        terms.append((multiplier, word))
        total = total + multiplier * gen
    return IdealPowerElement(basis=basis, terms=tuple(terms), assembled=total)


def generate_pair(f: PolyGerm, r: int, multipliers) -> PolyGerm:
    """g = f + sum(multiplier * generator) over the (r+2)-power generators."""
    if r < 1:
        raise ValueError("r must be >= 1")
    basis = JacobiIdealBasis.of(f)
    element = assemble_element(basis, r + 2, multipliers)
    return PolyGerm.from_poly(f + element.assembled)


def verify_ideal_pair(f: PolyGerm, g: PolyGerm, element: IdealPowerElement, r: int,
                      spec: SamplingSpec) -> ConditionReport:
    """Check the sampled ratio bounds for a pair built by construction.

    The membership of g - f in the (r+2)-power makes the bounds automatic,
    so a FAIL verdict can only mean broken inputs and raises instead of
    being returned.
    """
    if element.assembled != g - f:
        raise ValueError("element does not assemble to g - f")
    report = check_cr_criterion(f, g, r, spec)
    if report.verdict == Verdict.FAIL:
        raise RuntimeError(
            "sampled ratios diverge although the construction guarantees the bound; "
            "the inputs or the sampling window are wrong"
        )
    return report


def random_multipliers(n: int, power: int, seed: int, max_degree: int = 2):
    """Deterministic multiplier list with coefficients in (1/64)Z, |c| <= 1/8."""
    rng = random.Random(seed)
    monomials = multi_indices_upto(n, max_degree)
    out = []
    for _ in range(generator_count(n, power)):
        terms = {}
        for mono in monomials:
            k = rng.randint(-8, 8)
            if k:
                terms[mono] = Fraction(k, 64)
        out.append(Poly(n, terms))
    return out
