"""Prime sums against test functions over the rationals.

Covers the partial sums ``sum_p (log p)^n / p * phi_hat(log p / log R)``
and the limiting values of the weighted one-level density implied by
the explicit formula for r = 1, 2, 3.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import quadrature
from .kernels import TestFunctionPair

MEMORY_LIMIT = 10**9
SEGMENT = 1 << 20

# support windows for phi_hat under which the limits below hold
SUPPORT_WINDOW = {1: 0.5, 2: 0.25, 3: 0.5}
# (coefficient of phi(0), {n: coefficient of int_0^inf phi_hat(u) u^n du})
_EXPLICIT_TERMS = {
    1: (-0.5, {}),
    2: (-1.5, {1: 4.0}),
    3: (-2.5, {1: 12.0, 3: -8.0}),
}


class MemoryBudgetError(MemoryError):
    """Sieve bound above the default memory budget."""


class InsufficientSieveError(ValueError):
    """The prime table stops short of the primes the sum needs."""


class SupportWindowError(ValueError):
    """phi_hat is supported outside the window where the limit is known."""


@dataclass(frozen=True)
class PrimeTable:
    limit: int
    primes: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.primes)

    def count_up_to(self, x: float) -> int:
        return int(np.searchsorted(self.primes, x, side="right"))


def _small_primes(limit: int) -> np.ndarray:
    is_prime = np.ones(limit + 1, dtype=bool)
    is_prime[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if is_prime[p]:
            is_prime[p * p :: p] = False
    return np.flatnonzero(is_prime)


def sieve(limit: int, allow_large: bool = False) -> PrimeTable:
    """All primes up to ``limit`` by a segmented sieve of Eratosthenes.

    Raises:
        MemoryBudgetError: if ``limit`` exceeds 10^9 and ``allow_large`` is off.
    """
    if limit < 2:
        raise ValueError("limit must be at least 2")
    if limit > MEMORY_LIMIT and not allow_large:
        raise MemoryBudgetError(f"limit {limit} exceeds {MEMORY_LIMIT}; pass allow_large=True")
    base = _small_primes(math.isqrt(limit))
    chunks = []
    for lo in range(0, limit + 1, SEGMENT):
        hi = min(lo + SEGMENT, limit + 1)
        seg = np.ones(hi - lo, dtype=bool)
        for p in base:
            start = max(p * p, -(-lo // p) * p)
            if start >= hi:
                break
            seg[start - lo :: p] = False
        if lo == 0:
            seg[: min(2, hi)] = False
        chunks.append(np.flatnonzero(seg) + lo)
    return PrimeTable(limit, np.concatenate(chunks).astype(np.int64))


def moment_integral(pair: TestFunctionPair, n: int) -> float:
    """``int_0^inf phi_hat(u) u^n du`` over the support ``[0, delta]``."""
    return quadrature.integrate(lambda u: pair.phi_hat(u) * u**n, 0.0, pair.delta, rtol=1e-13, atol=1e-16)


def lemma41_partial_sum(n: int, R: float, pair: TestFunctionPair, table: PrimeTable) -> tuple[float, float, float]:
    """Prime sum against ``phi_hat`` and its leading asymptotic.

    Returns:
        ``(lhs, rhs, rel_error)`` with
        ``lhs = (1/log R) sum_p (log p)^n / p * phi_hat(log p / log R)``,
        ``rhs = (log R)^(n-1) int_0^inf phi_hat(u) u^(n-1) du`` and
        ``rel_error = |lhs - rhs| / |rhs|`` (``inf`` when rhs vanishes).

    Raises:
        InsufficientSieveError: if the table does not reach ``R^delta``.
    """
    if n < 1:
        raise ValueError("n must be a positive integer")
    if R <= 1:
        raise ValueError("R must exceed 1")
    log_r = math.log(R)
    reach = math.exp(pair.delta * log_r)
    if table.limit < reach * (1 - 1e-12):
        raise InsufficientSieveError(f"primes needed up to {reach:.6g}, table stops at {table.limit}")
    p = table.primes[table.primes <= reach].astype(float)
    logp = np.log(p)
    terms = logp**n / p * pair.phi_hat(logp / log_r)
    lhs = math.fsum(terms) / log_r
    rhs = log_r ** (n - 1) * moment_integral(pair, n - 1)
    rel = abs(lhs - rhs) / abs(rhs) if rhs else math.inf
    return lhs, rhs, rel


def explicit_formula_rhs(r: int, pair: TestFunctionPair) -> float:
    """Limiting weighted one-level density for r = 1, 2, 3.

    ``phi_hat(0) + c_r phi(0)`` plus moment integrals of ``phi_hat``, valid
    while ``phi_hat`` is supported in ``[-alpha_r, alpha_r]``.

    Raises:
        SupportWindowError: if ``pair.delta`` exceeds the window.
    """
    if r not in _EXPLICIT_TERMS:
        raise ValueError("r must be 1, 2 or 3")
    if pair.delta > SUPPORT_WINDOW[r]:
        raise SupportWindowError(f"delta={pair.delta} outside the r={r} window {SUPPORT_WINDOW[r]}")
    c0, moments = _EXPLICIT_TERMS[r]
    value = float(pair.phi_hat(0.0)) + c0 * float(pair.phi(0.0))
    for n, c in moments.items():
        value += c * moment_integral(pair, n)
    return value
