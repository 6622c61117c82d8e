"""Chebyshev machinery and the weighted Sato-Tate measures.

Polynomials ``T_l`` are the rescaled second-kind family, ``T_l(2 cos t) =
sin((l+1) t) / sin t``, orthonormal for the Sato-Tate measure
``mu_inf = (1/pi) sqrt(1 - x^2/4) dx`` on [-2, 2].  Every measure here has a
density relative to ``mu_inf`` depending on a norm ``p >= 2`` (any prime
power) and a weight exponent ``r``; ``harmonic=True`` selects the measures
with the harmonic weight kept, ``harmonic=False`` the ones with it removed.

Integrals against ``mu_inf`` use ``x = 2 cos t``, which turns the square-root
endpoint behaviour into the smooth weight ``(2/pi) sin^2 t`` on [0, pi].
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from . import quadrature

RTOL = 1e-12


# Chebyshev polynomials


def cheb_eval(ell: int, x):
    """T_ell(x) by the three-term recurrence ``T_{n+1} = x T_n - T_{n-1}``."""
    if ell < 0:
        raise ValueError("degree must be nonnegative")
    x = np.asarray(x, dtype=float)
    prev, cur = np.ones_like(x), x.copy()
    if ell == 0:
        return prev if prev.ndim else float(prev)
    for _ in range(ell - 1):
        prev, cur = cur, x * cur - prev
    return cur if cur.ndim else float(cur)


@dataclass(frozen=True)
class ChebT:
    """T_ell in the monomial basis, ``coeffs[k]`` multiplying ``x**k``."""

    ell: int
    coeffs: tuple[Fraction, ...]

    def __call__(self, x):
        return np.polynomial.polynomial.polyval(x, [float(c) for c in self.coeffs])


@lru_cache(maxsize=None)
def cheb_poly(ell: int) -> ChebT:
    if ell < 0:
        raise ValueError("degree must be nonnegative")
    prev, cur = [Fraction(1)], [Fraction(0), Fraction(1)]
    if ell == 0:
        return ChebT(0, tuple(prev))
    for _ in range(ell - 1):
        nxt = [Fraction(0)] + cur
        for k, c in enumerate(prev):
            nxt[k] -= c
        prev, cur = cur, nxt
    return ChebT(ell, tuple(cur))


def sato_tate_integral(f: Callable[[np.ndarray], np.ndarray], rtol: float = RTOL) -> float:
    """``int f dmu_inf`` via ``x = 2 cos t``."""
    return quadrature.integrate(
        lambda t: f(2 * np.cos(t)) * (2 / np.pi) * np.sin(t) ** 2,
        0.0,
        np.pi,
        rtol=rtol,
        atol=1e-16,
        initial=4,
    )


def cheb_orthonormality(ell: int, m: int) -> float:
    """``int T_ell T_m dmu_inf``."""
    return sato_tate_integral(lambda x: cheb_eval(ell, x) * cheb_eval(m, x))


GENERATING_KINDS = ("plain", "ell", "ell2", "ell3")


def generating_closed(kind: str, x: float, t: float) -> float:
    """Closed rational forms of ``sum_l l^k T_l(x) t^l`` for k = 0..3."""
    q = t * t - x * t + 1
    if kind == "plain":
        return 1 / q
    if kind == "ell":
        return (-2 * t**2 + x * t) / q**2
    if kind == "ell2":
        return (4 * t**4 - 3 * x * t**3 + (x * x - 4) * t**2 + x * t) / q**3
    if kind == "ell3":
        # t d/dt of the ell2 form
        return (
            t
            * (
                -8 * t + 32 * t**3 - 8 * t**5 + x - 18 * t**2 * x + 5 * t**4 * x
                + 4 * t * x**2 - 4 * t**3 * x**2 + t**2 * x**3
            )
            / q**4
        )
    raise ValueError(f"unknown kind {kind!r}")


def generating_series(kind: str, x: float, t: float, tail_tol: float = 1e-16) -> float:
    """Truncated ``sum_l l^k T_l(x) t^l``.

    Uses ``|T_l(x)| <= l + 1`` on [-2, 2]; summation stops once the
    remaining terms are bounded by ``tail_tol`` via a geometric majorant.
    """
    k = GENERATING_KINDS.index(kind)
    if abs(t) >= 1:
        raise ValueError("need |t| < 1")
    if abs(x) > 2:
        raise ValueError("need |x| <= 2")
    a = abs(t)
    # T_{-1} = 0 starts the recurrence
    total, prev, cur = 0.0, 0.0, 1.0
    ell = 0
    while True:
        total += ell**k * cur * t**ell
        prev, cur = cur, x * cur - prev
        ell += 1
        # majorant of the tail: sum_{m >= ell} m^k (m+1) a^m; ratio of
        # successive majorant terms is below rho once ell is large enough
        rho = ((ell + 1) / ell) ** (k + 1) * a
        if rho < 1:
            bound = ell**k * (ell + 1) * a**ell / (1 - rho)
            if bound < tail_tol:
                return total
        if ell > 100000:
            raise ArithmeticError("generating series did not converge")


def generating_series_check(kind: str, x: float, t: float) -> tuple[float, float]:
    return generating_series(kind, x, t), generating_closed(kind, x, t)


# measures


@dataclass(frozen=True)
class MeasureSpec:
    """A measure ``density(x) dmu_inf(x)`` on [-2, 2]."""

    p: int
    r: int
    harmonic: bool = True

    def __post_init__(self):
        if self.p < 2:
            raise ValueError("p must be at least 2")
        if self.r < 1:
            raise ValueError("r must be positive")
        if not self.harmonic and self.r > 3:
            raise ValueError("unweighted measures are only known for r <= 3")

    @property
    def label(self) -> str:
        kind = "harmonic" if self.harmonic else "unweighted"
        return f"{kind} p={self.p} r={self.r}"


def _local_factors(p: int, x):
    s = math.sqrt(p)
    return 1 - x / s + 1 / p, 1 + x / s + 1 / p


def measure_density(spec: MeasureSpec, x):
    """Density of the measure relative to ``mu_inf``."""
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 2):
        raise ValueError("x must lie in [-2, 2]")
    p, r = spec.p, spec.r
    minus, plus = _local_factors(p, x)
    q = 1 / p
    if spec.harmonic:
        if r <= 3:
            const = (1 - q) ** (r * (r - 1) // 2)
        else:
            const = 1 / float(a_pr(p, r, "closed"))
        return const / minus**r
    if r == 1:
        return (1 - q) * (1 + q) ** 2 / (minus**2 * plus)
    if r == 2:
        return (1 - q * q) ** 3 / (1 + q * q) / (minus**3 * plus)
    return (1 - q) ** 5 * (1 + q) ** 4 / (1 + q + 4 * q**2 + q**3 + q**4) / (minus**4 * plus)


def measure_mass(spec: MeasureSpec, rtol: float = RTOL) -> float:
    return sato_tate_integral(lambda x: measure_density(spec, x), rtol)


def cheb_moment(spec: MeasureSpec, ell: int, rtol: float = RTOL) -> float:
    """``int T_ell dmu`` by quadrature."""
    if ell < 0:
        raise ValueError("ell must be nonnegative")
    return sato_tate_integral(lambda x: cheb_eval(ell, x) * measure_density(spec, x), rtol)


def moment_bracket(spec: MeasureSpec, ell: int) -> Fraction:
    """Exact rational ``B`` with ``moment(ell) = B * p**(-ell/2)``."""
    if ell < 0:
        raise ValueError("ell must be nonnegative")
    p, r = spec.p, spec.r
    q = Fraction(1, p)
    if spec.harmonic:
        if r == 1:
            return Fraction(1)
        if r == 2:
            return Fraction(ell + 1)
        if r == 3:
            return (Fraction(1, 2) - q / 2) * ell**2 + (Fraction(3, 2) - q / 2) * ell + 1
        raise ValueError("no closed moment formula for harmonic r > 3")
    if r == 1:
        return unweighted_r1_local_ratio(p, ell)
    if r == 2:
        total = Fraction(ell + 1)
        for alpha in range(1, ell + 1):
            parity = Fraction(1) if alpha % 2 == 0 else Fraction(2 * p, p * p + 1)
            total += (ell + 1 - alpha) * (1 - q) * parity
        return total
    return H_ratio(p, ell)


def closed_moment(spec: MeasureSpec, ell: int) -> float:
    return float(moment_bracket(spec, ell)) * spec.p ** (-ell / 2)


def unweighted_r1_local_ratio(p: int, ell: int) -> Fraction:
    """Ratio of local lattice sums at ``n = p^ell`` and ``n = 1``.

    The local sum is ``sum_{e <= ell} sum_{k >= ceil(e/2)} p^e p^(-2k)``:
    ``r = p^e`` runs over divisors of ``n`` and ``l = p^k`` over ``r | l^2``.
    Each inner geometric series is summed exactly.
    """

    def local(ell_: int) -> Fraction:
        t = Fraction(1, p * p)
        return sum(
            (Fraction(p) ** e * t ** ((e + 1) // 2) / (1 - t) for e in range(ell_ + 1)),
            Fraction(0),
        )

    return local(ell) / local(0)


def reconstruct_density(spec: MeasureSpec, x, L: int, moments: Sequence[float] | None = None):
    """Partial Chebyshev sum ``sum_{l <= L} moment(l) T_l(x)``."""
    if moments is None:
        moments = [cheb_moment(spec, ell) for ell in range(L + 1)]
    x = np.asarray(x, dtype=float)
    total = np.zeros_like(x)
    prev, cur = np.zeros_like(x), np.ones_like(x)
    for ell in range(L + 1):
        total = total + moments[ell] * cur
        prev, cur = cur, x * cur - prev
    return total


# the normalizer a(p, r)


def a_pr_closed_branches(p: int, r: int) -> dict[str, Fraction]:
    """Both rational closed forms of a(p, r) where they apply.

    ``power`` covers r <= 3, ``binomial`` covers r >= 3; at r = 3 both exist.
    """
    q = Fraction(1, p)
    out = {}
    if r <= 3:
        out["power"] = (1 - q) ** (-(r * (r - 1) // 2))
    if r >= 3:
        first = sum((comb(r - 1, ell) ** 2 * q**ell for ell in range(r)), Fraction(0))
        second = sum((comb(r - 3, ell) * comb(r + 1, ell + 2) * q ** (ell + 1) for ell in range(r - 2)), Fraction(0))
        out["binomial"] = (1 - q) ** (1 - 2 * r) * (first - second)
    return out


class SeriesTruncationError(ArithmeticError):
    pass


def a_pr_series(p: int, r: int, tol: float = 1e-16, max_terms: int = 100000) -> float:
    """Hypergeometric form ``sum C(r+l-1,l)^2 p^-l - sum C(r+l-1,l) C(r+l+1,l+2) p^(-l-1)``."""
    total = 0.0
    for ell in range(max_terms):
        first = comb(r + ell - 1, ell) ** 2 / p**ell
        second = comb(r + ell - 1, ell) * comb(r + ell + 1, ell + 2) / p ** (ell + 1)
        total += first - second
        # both term sequences decay with ratio at most rho from here on
        rho = ((r + ell) / (ell + 1)) ** 2 / p
        if rho < 1 and (first + second) * rho / (1 - rho) < tol * max(abs(total), 1.0):
            return total
    raise SeriesTruncationError(f"a({p},{r}) series did not converge in {max_terms} terms")


def a_pr_quadrature(p: int, r: int) -> float:
    """``(2/pi) int_0^pi sin^2 t / (1 - 2 cos t / sqrt p + 1/p)^r dt``."""
    return sato_tate_integral(lambda x: _local_factors(p, x)[0] ** (-r))


def a_pr(p: int, r: int, method: str = "closed"):
    if p < 2 or r < 1:
        raise ValueError("need p >= 2 and r >= 1")
    if method == "closed":
        branches = a_pr_closed_branches(p, r)
        return branches.get("power", branches.get("binomial"))
    if method == "hypergeometric":
        return a_pr_series(p, r)
    if method == "quadrature":
        return a_pr_quadrature(p, r)
    raise ValueError(f"unknown method {method!r}")


def A_p_at_zero(p: int, r: int, m: int) -> float:
    """``(1 - 1/p)^(r(r-1)/2) int T_m / (1 - x/sqrt p + 1/p)^r dmu_inf``."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    const = (1 - 1 / p) ** (r * (r - 1) // 2)
    return const * sato_tate_integral(lambda x: cheb_eval(m, x) * _local_factors(p, x)[0] ** (-r))


# delta(m_1, ..., m_r)


def factorize(n: int) -> dict[int, int]:
    if n < 1:
        raise ValueError("n must be positive")
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def delta_sato_tate(groups: Iterable[tuple[int, Sequence[int]]]) -> float:
    """Product over primes of ``int prod_i T_{l_i} dmu_inf``.

    ``groups`` lists each prime once with the exponents it carries in the
    arguments ``m_1, ..., m_r``.
    """
    seen = set()
    total = 1.0
    for p, exps in groups:
        if p in seen:
            raise ValueError(f"prime {p} listed twice")
        seen.add(p)
        exps = [e for e in exps if e]
        if not exps:
            continue
        total *= sato_tate_integral(lambda x, exps=exps: np.prod([cheb_eval(e, x) for e in exps], axis=0))
    return total


def delta_of(*ms: int) -> float:
    """``delta(m_1, ..., m_r)`` for positive integers, grouping by prime."""
    by_prime: dict[int, list[int]] = {}
    for m in ms:
        for p, e in factorize(m).items():
            by_prime.setdefault(p, []).append(e)
    return delta_sato_tate(by_prime.items())


# g and H


def g_value(p: int, ell: int) -> Fraction:
    """``g(p^l) = l + 1 + (1 - 1/p) l (l + 1) / 2``."""
    if ell < 0:
        raise ValueError("ell must be nonnegative")
    return ell + 1 + (1 - Fraction(1, p)) * Fraction(ell * (ell + 1), 2)


def g_multiplicative(factored: Mapping[int, int]) -> Fraction:
    out = Fraction(1)
    for p, e in factored.items():
        out *= g_value(p, e)
    return out


def _g_even_shift_sum(p: int, m: int) -> Fraction:
    """``sum_{b >= 0} g(p^(m + 2b)) p^(-2b)`` in closed form.

    ``g(p^(m+2b))`` is quadratic in b, so the sum reduces to
    ``sum b^k t^b`` for k <= 2 and ``t = p^-2``.
    """
    c = 1 - Fraction(1, p)
    t = Fraction(1, p * p)
    s0 = 1 / (1 - t)
    s1 = t / (1 - t) ** 2
    s2 = t * (1 + t) / (1 - t) ** 3
    const = m + 1 + c * Fraction(m * (m + 1), 2)
    linear = 2 + c * (2 * m + 1)
    quad = 2 * c
    return const * s0 + linear * s1 + quad * s2


def H_value(p: int, ell: int) -> Fraction:
    """``H(p^l) = sum_{a=0}^{l} [a even] S(l - a) + [a odd] S(l - a + 1) / p``.

    ``S(m)`` is :func:`_g_even_shift_sum`.  This is the double series over
    ``r >= 0, 2r >= a`` of ``p^a g(p^(l + 2r - 2a)) p^(-2r)``, regrouped.
    """
    if ell < 0:
        raise ValueError("ell must be nonnegative")
    total = Fraction(0)
    for a in range(ell + 1):
        if a % 2 == 0:
            total += _g_even_shift_sum(p, ell - a)
        else:
            total += _g_even_shift_sum(p, ell - a + 1) / p
    return total


def H_ratio(p: int, ell: int) -> Fraction:
    """``H(p^l) / H(O_F)`` with ``H(O_F) = H(p^0)``."""
    return H_value(p, ell) / H_value(p, 0)


def H_ratio_closed(p: int, ell: int) -> Fraction:
    """Closed polynomial-in-l form of ``H(p^l) / H(O_F)``."""
    P = Fraction(p)
    D = P**4 + P**3 + 4 * P**2 + P + 1
    sign = 1 if ell % 2 == 0 else -1
    return (
        ell**3 * (P - 1) ** 2 * (P + 1) ** 3 / (12 * P * D)
        + ell**2 * (P - 1) * (P + 1) ** 2 * (5 * P**2 + 2 * P + 1) / (8 * P * D)
        + ell * (P + 1) * (17 * P**4 + 12 * P**3 + 20 * P**2 - 1) / (12 * P * D)
        + (Fraction(15, 16) * P**4 + Fraction(21, 16) * P**3 + Fraction(27, 8) * P**2
           + Fraction(13, 8) * P + Fraction(11, 16)) / D
        + Fraction(1, 16) / (P * D)
        + sign * (
            (Fraction(1, 16) * P**4 - Fraction(5, 16) * P**3 + Fraction(5, 8) * P**2
             - Fraction(5, 8) * P + Fraction(5, 16)) / D
            - Fraction(1, 16) / (P**5 + P**4 + 4 * P**3 + P**2 + P)
        )
    )


def unweighted_moment_r3(p: int, ell: int) -> float:
    return float(H_ratio(p, ell)) * p ** (-ell / 2)


# divisor function


def tau(factored: Mapping[int, int]) -> int:
    out = 1
    for e in factored.values():
        out *= e + 1
    return out


def _merge(a: Mapping[int, int], b: Mapping[int, int], sign: int = 1) -> dict[int, int]:
    out = dict(a)
    for p, e in b.items():
        out[p] = out.get(p, 0) + sign * e
    return {p: e for p, e in out.items() if e}


def divisor_utility(m: Mapping[int, int], n: Mapping[int, int]) -> int:
    """``tau(mn) = sum_{d | (m, n)} mu(d) tau(m/d) tau(n/d)`` over squarefree d."""
    common = sorted(p for p in m if p in n and m[p] > 0 and n[p] > 0)
    total = 0
    for mask in range(1 << len(common)):
        d = {p: 1 for i, p in enumerate(common) if mask >> i & 1}
        mu = -1 if len(d) % 2 else 1
        total += mu * tau(_merge(m, d, -1)) * tau(_merge(n, d, -1))
    return total
