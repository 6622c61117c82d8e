"""Residue coefficients b_r(j) by exact coefficient extraction.

The r-fold contour integral over small circles around the origin is the
coefficient of ``z_1^(2r-2) ... z_r^(2r-2)`` in

    Delta(z^2) * Delta(z) * (z_1^j + ... + z_r^j) * exp(z_1 + ... + z_r)

times the prefactor ``(-1)^(r(r-1)/2) 2^r / r!``.

Two extraction routes are provided.  The main one writes both Vandermonde
factors as determinants, so the coefficient becomes a sum over pairs of
permutations of products of exponential Taylor coefficients; that sum is
the mixed discriminant of small integer matrices and is evaluated exactly
by polarization.  The second expands the Vandermonde product as a
truncated polynomial and contracts it against the exponential term by term.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from collections import Counter
from itertools import product
from math import comb, factorial
from typing import Sequence

from .exactalg import TruncPoly, coefficient, exp_sum, integer_det, vandermonde

DEFAULT_MAX_R = 8


@dataclass(frozen=True)
class BTable:
    """Exact values b_r(j) for 0 <= j <= 2r - 2."""

    r: int
    values: dict[int, Fraction] = field(default_factory=dict)

    def __getitem__(self, j: int) -> Fraction:
        return self.values.get(j, Fraction(0))

    def nonzero(self) -> dict[int, Fraction]:
        return {j: v for j, v in self.values.items() if v}


def _check_r(r: int, allow_large: bool) -> None:
    if r < 1:
        raise ValueError("r must be a positive integer")
    if r > DEFAULT_MAX_R and not allow_large:
        raise ValueError(
            f"r={r} exceeds the default limit {DEFAULT_MAX_R}; pass allow_large=True to override"
        )


def prefactor(r: int) -> Fraction:
    sign = -1 if (r * (r - 1) // 2) % 2 else 1
    return Fraction(sign * 2**r, factorial(r))


@lru_cache(maxsize=None)
def _vandermonde_product(r: int) -> TruncPoly:
    """Delta(z^2) * Delta(z), truncated at 2r - 2 per variable.

    Factors are multiplied pairwise as (z_j - z_i)(z_j^2 - z_i^2) so the
    intermediate products stay small.
    """
    cap = 2 * r - 2
    result = TruncPoly.constant(r, cap)
    for j in range(r):
        for i in range(j):
            zi = TruncPoly.variable(r, cap, i)
            zj = TruncPoly.variable(r, cap, j)
            result = result * ((zj - zi) * (zj * zj - zi * zi))
    return result


def extract(r: int, shift: Sequence[int]) -> Fraction:
    """Coefficient of ``z^(2r-2,...,2r-2)`` in Delta(z^2)Delta(z) z^shift exp(sum z).

    No prefactor is applied.
    """
    if len(shift) != r:
        raise ValueError(f"shift must have length {r}")
    return _extract(r, tuple(sorted(shift)))


def _scaled_block(r: int, s: int) -> list[list[int]]:
    """``target! / (target - a - 2b - s)!`` for rows a and columns b (0 if negative)."""
    target = 2 * r - 2
    return [
        [factorial(target) // factorial(target - a - 2 * b - s) if target - a - 2 * b - s >= 0 else 0 for b in range(r)]
        for a in range(r)
    ]


@lru_cache(maxsize=4096)
def _extract(r: int, shift: tuple[int, ...]) -> Fraction:
    # Delta(z) = det[z_i^a], Delta(z^2) = det[z_i^(2b)]; pairing them with the
    # Taylor coefficients of exp gives sum_{sigma,tau} sgn * prod_i M_i[sigma(i), tau(i)],
    # the coefficient of lambda_1...lambda_r in det(sum_i lambda_i M_i).  By
    # polarization that is sum_S (-1)^(r-|S|) det(sum_{i in S} M_i), and
    # variables sharing a shift share a matrix, so only subset sizes matter.
    groups = Counter(shift)
    shifts = list(groups)
    blocks = {s: _scaled_block(r, s) for s in shifts}
    total = 0
    for counts in product(*(range(groups[s] + 1) for s in shifts)):
        weight = 1
        for s, c in zip(shifts, counts):
            weight *= comb(groups[s], c)
        mat = [[sum(c * blocks[s][a][b] for s, c in zip(shifts, counts)) for b in range(r)] for a in range(r)]
        total += (-1) ** (r - sum(counts)) * weight * integer_det(mat)
    return Fraction(total, factorial(2 * r - 2) ** r)


def extract_expanded(r: int, shift: Sequence[int]) -> Fraction:
    """Same coefficient as :func:`extract`, via the expanded Vandermonde product.

    Exponential coefficients ``1/n!`` are scaled by ``target!`` so the inner
    loop stays in integers.  Practical up to r = 6.
    """
    if len(shift) != r:
        raise ValueError(f"shift must have length {r}")
    target = 2 * r - 2
    scaled = [factorial(target) // factorial(n) for n in range(target + 1)]
    total = 0
    for exps, c in _vandermonde_product(r).terms.items():
        term = c
        for a, s in zip(exps, shift):
            n = target - a - s
            if n < 0:
                term = 0
                break
            term *= scaled[n]
        total += term
    return Fraction(total) / factorial(target) ** r


def b_coefficient(r: int, j: int, allow_large: bool = False) -> Fraction:
    """Exact residue coefficient b_r(j)."""
    _check_r(r, allow_large)
    if j < 0:
        raise ValueError("j must be nonnegative")
    total = Fraction(0)
    for k in range(r):
        shift = [0] * r
        shift[k] = j
        total += extract(r, shift)
    return prefactor(r) * total


def b_coefficient_expanded(r: int, j: int) -> Fraction:
    """b_r(j) through :func:`extract_expanded`; an independent route for r <= 6."""
    if r < 1 or j < 0:
        raise ValueError("need r >= 1 and j >= 0")
    return prefactor(r) * r * extract_expanded(r, [j] + [0] * (r - 1))


def b_coefficient_symmetrized(r: int, j: int, allow_large: bool = False) -> Fraction:
    """b_r(j) with the power sum replaced by r * z_1^j."""
    _check_r(r, allow_large)
    return prefactor(r) * r * extract(r, [j] + [0] * (r - 1))


def b_coefficient_direct(r: int, j: int) -> Fraction:
    """b_r(j) by multiplying out the full integrand, exponential included.

    Much slower than :func:`b_coefficient`; kept as an independent route.
    """
    if r < 1 or j < 0:
        raise ValueError("need r >= 1 and j >= 0")
    cap = 2 * r - 2
    power_sum = TruncPoly(r, cap)
    for k in range(r):
        power_sum = power_sum + TruncPoly.variable(r, cap, k, j)
    integrand = vandermonde(r, 2, cap) * vandermonde(r, 1, cap) * power_sum * exp_sum(r, cap)
    return prefactor(r) * coefficient(integrand, [cap] * r)


def b_table(r: int, allow_large: bool = False) -> BTable:
    """All b_r(j) for 0 <= j <= 2r - 2."""
    _check_r(r, allow_large)
    return BTable(r, {j: b_coefficient(r, j, allow_large) for j in range(2 * r - 1)})


def g_one(r: int) -> Fraction:
    """g_r(1) = b_r(0) / r."""
    return b_coefficient(r, 0, allow_large=True) / r


def vanishing_check(r: int, alpha: Sequence[int]) -> bool:
    """True iff the extraction with monomial ``z^alpha`` inserted is exactly zero.

    The integral is known to vanish whenever sum(alpha) >= r(r-1)/2 + 1;
    for smaller sums the literal zero test is still returned.
    """
    if len(alpha) != r or min(alpha) < 0:
        raise ValueError(f"alpha must be {r} nonnegative integers")
    return extract(r, list(alpha)) == 0
