"""Exact truncated multivariate polynomial algebra over the rationals.

Coefficients are :class:`fractions.Fraction` values, so every operation is
exact.  A :class:`TruncPoly` keeps only monomials whose exponent in each
variable is at most ``cap``; products drop anything above the cap.  This is
all the residue engine needs to read off a coefficient of a product of
polynomials and exponentials.
"""
from __future__ import annotations

from fractions import Fraction
from math import factorial
from typing import Iterable, Mapping

Rational = Fraction
Exponents = tuple[int, ...]


def _normalize(c):
    """Store integral coefficients as int (much faster), the rest as Fraction."""
    c = Fraction(c)
    return c.numerator if c.denominator == 1 else c


class TruncPoly:
    """Sparse polynomial in ``nvars`` variables truncated at ``cap`` per variable.

    Args:
        nvars: Number of variables.
        cap: Largest exponent retained in any single variable.
        terms: Optional mapping from exponent tuples to coefficients.  Terms
            exceeding the cap and zero coefficients are dropped.
    """

    __slots__ = ("nvars", "cap", "terms")

    def __init__(self, nvars: int, cap: int, terms: Mapping[Exponents, object] | None = None):
        if nvars < 0 or cap < 0:
            raise ValueError("nvars and cap must be nonnegative")
        self.nvars = nvars
        self.cap = cap
        # values are int when integral, Fraction otherwise
        self.terms: dict[Exponents, int | Fraction] = {}
        for exps, c in (terms or {}).items():
            exps = tuple(exps)
            if len(exps) != nvars:
                raise ValueError(f"exponent vector {exps} has wrong length for {nvars} variables")
            if min(exps, default=0) < 0:
                raise ValueError(f"negative exponent in {exps}")
            c = _normalize(c)
            if c and max(exps, default=0) <= cap:
                self.terms[exps] = self.terms.get(exps, 0) + c
        self._purge()

    @classmethod
    def constant(cls, nvars: int, cap: int, value=1) -> "TruncPoly":
        return cls(nvars, cap, {(0,) * nvars: value})

    @classmethod
    def monomial(cls, nvars: int, cap: int, exps: Iterable[int], coeff=1) -> "TruncPoly":
        return cls(nvars, cap, {tuple(exps): coeff})

    @classmethod
    def variable(cls, nvars: int, cap: int, var: int, power: int = 1) -> "TruncPoly":
        exps = [0] * nvars
        exps[var] = power
        return cls.monomial(nvars, cap, exps)

    def _purge(self) -> None:
        self.terms = {e: c for e, c in self.terms.items() if c}

    def _check_compatible(self, other: "TruncPoly") -> None:
        if self.nvars != other.nvars or self.cap != other.cap:
            raise ValueError("operands differ in variable count or cap")

    def _coerce(self, other) -> "TruncPoly":
        if isinstance(other, TruncPoly):
            self._check_compatible(other)
            return other
        return TruncPoly.constant(self.nvars, self.cap, other)

    def __add__(self, other) -> "TruncPoly":
        other = self._coerce(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + c
        return TruncPoly(self.nvars, self.cap, out)

    __radd__ = __add__

    def __neg__(self) -> "TruncPoly":
        return TruncPoly(self.nvars, self.cap, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> "TruncPoly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "TruncPoly":
        return self._coerce(other) - self

    def __mul__(self, other) -> "TruncPoly":
        if not isinstance(other, TruncPoly):
            c = _normalize(other)
            return TruncPoly(self.nvars, self.cap, {e: c * v for e, v in self.terms.items()})
        self._check_compatible(other)
        cap = self.cap
        out: dict[Exponents, int | Fraction] = {}
        for ea, ca in self.terms.items():
            for eb, cb in other.terms.items():
                e = tuple(map(int.__add__, ea, eb))
                if max(e, default=0) > cap:
                    continue
                out[e] = out.get(e, 0) + ca * cb
        result = TruncPoly(self.nvars, cap)
        result.terms = {e: _normalize(c) for e, c in out.items() if c}
        return result

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, TruncPoly):
            return NotImplemented
        return (self.nvars, self.cap, self.terms) == (other.nvars, other.cap, other.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __repr__(self) -> str:
        return f"TruncPoly(nvars={self.nvars}, cap={self.cap}, terms={len(self.terms)})"

    def permute(self, perm: Iterable[int]) -> "TruncPoly":
        """Relabel variables: variable ``i`` of the result is variable ``perm[i]`` of self."""
        perm = tuple(perm)
        if sorted(perm) != list(range(self.nvars)):
            raise ValueError(f"{perm} is not a permutation of {self.nvars} variables")
        return TruncPoly(
            self.nvars, self.cap, {tuple(e[p] for p in perm): c for e, c in self.terms.items()}
        )

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)


def coefficient(poly: TruncPoly, exponents: Iterable[int]) -> Fraction:
    """Exact coefficient of ``z**exponents`` in ``poly`` (zero if absent)."""
    exps = tuple(exponents)
    if len(exps) != poly.nvars:
        raise ValueError(f"expected {poly.nvars} exponents, got {len(exps)}")
    if max(exps, default=0) > poly.cap:
        raise ValueError(f"exponents {exps} exceed cap {poly.cap}")
    return Fraction(poly.terms.get(exps, 0))


def vandermonde(nvars: int, power: int, cap: int | None = None) -> TruncPoly:
    """Expanded product of ``z_j**power - z_i**power`` over ``i < j``.

    With ``cap=None`` the cap is large enough to keep every term.
    """
    if nvars < 1:
        raise ValueError("vandermonde needs at least one variable")
    if power < 1:
        raise ValueError("power must be positive")
    if cap is None:
        cap = power * (nvars - 1)
    result = TruncPoly.constant(nvars, cap)
    for j in range(nvars):
        for i in range(j):
            factor = TruncPoly.variable(nvars, cap, j, power) - TruncPoly.variable(nvars, cap, i, power)
            result = result * factor
    return result


def truncated_exp(var: int, cap: int, nvars: int = 1) -> TruncPoly:
    """Taylor polynomial of ``exp(z_var)`` through degree ``cap``."""
    if cap < 0:
        raise ValueError("cap must be nonnegative")
    terms = {}
    for m in range(cap + 1):
        exps = [0] * nvars
        exps[var] = m
        terms[tuple(exps)] = Fraction(1, factorial(m))
    return TruncPoly(nvars, cap, terms)


def exp_sum(nvars: int, cap: int) -> TruncPoly:
    """Truncation of ``exp(z_1 + ... + z_n)`` as a product of one-variable exponentials."""
    result = TruncPoly.constant(nvars, cap)
    for v in range(nvars):
        result = result * truncated_exp(v, cap, nvars)
    return result


def integer_det(matrix: Iterable[Iterable[int]]) -> int:
    """Determinant of a square integer matrix by fraction-free Bareiss elimination."""
    m = [list(map(int, row)) for row in matrix]
    n = len(m)
    if any(len(row) != n for row in m):
        raise ValueError("matrix must be square")
    sign, prev = 1, 1
    for k in range(n - 1):
        if m[k][k] == 0:
            pivot = next((i for i in range(k + 1, n) if m[i][k]), None)
            if pivot is None:
                return 0
            m[k], m[pivot] = m[pivot], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1] if n else 1
