"""Density kernels for weighted one-level densities.

Closed forms are held as :class:`TrigRational` objects: finite sums of
``c * pi**k * x**(-m) * f(2 pi x)`` with ``f`` one of 1, cos, sin and ``c``
rational.  Keeping the power of pi symbolic makes differentiation and the
Laurent expansion at 0 exact, so "this kernel has no pole at 0" is a
rational identity rather than a floating-point observation.

Kernel families:

* ``theoremA``: the three proven kernels, typed in from their printed form.
* ``conjectureD``: ``1 + h_0 - r * sum_j (-1)^j 2^(j+1) b_r(j) / (j! b_r(0)) h_j``.
* ``Sp``, ``SOeven``, ``U``: the random-matrix kernels.  ``SOeven(r)`` is
  ``Sp(r - 1)`` and ``U(r)`` is their average.  ``SOeven(0)`` is the plain
  orthogonal kernel ``1 + sin(2 pi x)/(2 pi x)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial
from typing import Callable, Iterable

import mpmath
import numpy as np

from . import quadrature
from .residues import BTable, b_table

KINDS = ("const", "cos", "sin")
FAMILIES = ("theoremA", "conjectureD", "Sp", "SOeven", "U")

# (m, kind, pi_power): coefficient of pi**pi_power * x**(-m) * kind(2 pi x)
Key = tuple[int, str, int]

SERIES_ORDER = 96
SERIES_RADIUS = 2.5


class TrigRational:
    """Finite linear combination of ``pi**k x**(-m) {1, cos(2 pi x), sin(2 pi x)}``.

    A negative ``m`` is a polynomial term ``x**|m|``, so the polynomial part
    lives in the same table as the rest.
    """

    def __init__(self, terms: dict[Key, object] | None = None):
        self.terms: dict[Key, Fraction] = {}
        for (m, kind, k), c in (terms or {}).items():
            if kind not in KINDS:
                raise ValueError(f"unknown kind {kind!r}")
            c = Fraction(c)
            if c:
                key = (int(m), kind, int(k))
                self.terms[key] = self.terms.get(key, Fraction(0)) + c
        self.terms = {key: c for key, c in self.terms.items() if c}
        self._series_cache: np.ndarray | None = None
        self._regular: bool | None = None

    @classmethod
    def term(cls, m: int, kind: str, pi_power: int = 0, coeff=1) -> "TrigRational":
        return cls({(m, kind, pi_power): coeff})

    @classmethod
    def constant(cls, value=1) -> "TrigRational":
        return cls.term(0, "const", 0, value)

    # arithmetic

    def __add__(self, other) -> "TrigRational":
        other = other if isinstance(other, TrigRational) else TrigRational.constant(other)
        out = dict(self.terms)
        for key, c in other.terms.items():
            out[key] = out.get(key, Fraction(0)) + c
        return TrigRational(out)

    __radd__ = __add__

    def __neg__(self) -> "TrigRational":
        return TrigRational({key: -c for key, c in self.terms.items()})

    def __sub__(self, other) -> "TrigRational":
        other = other if isinstance(other, TrigRational) else TrigRational.constant(other)
        return self + (-other)

    def __rsub__(self, other) -> "TrigRational":
        return TrigRational.constant(other) - self

    def __mul__(self, scalar) -> "TrigRational":
        if isinstance(scalar, TrigRational):
            return NotImplemented
        s = Fraction(scalar)
        return TrigRational({key: s * c for key, c in self.terms.items()})

    __rmul__ = __mul__

    def __truediv__(self, scalar) -> "TrigRational":
        return self * (1 / Fraction(scalar))

    def __eq__(self, other) -> bool:
        if not isinstance(other, TrigRational):
            return NotImplemented
        return self.terms == other.terms

    def __repr__(self) -> str:
        return f"TrigRational({len(self.terms)} terms, pole order {self.pole_order})"

    def scale(self, coeff=1, m: int = 0, pi_power: int = 0) -> "TrigRational":
        """Multiply by ``coeff * pi**pi_power * x**(-m)``."""
        c = Fraction(coeff)
        return TrigRational({(mm + m, kind, k + pi_power): c * v for (mm, kind, k), v in self.terms.items()})

    @property
    def pole_order(self) -> int:
        return max((m for m, _, _ in self.terms), default=0)

    # calculus

    def derivative(self, order: int = 1) -> "TrigRational":
        f = self
        for _ in range(order):
            out: dict[Key, Fraction] = {}

            def add(key: Key, c: Fraction) -> None:
                out[key] = out.get(key, Fraction(0)) + c

            for (m, kind, k), c in f.terms.items():
                if m != 0:
                    # d/dx x^(-m) = -m x^(-m-1)
                    add((m + 1, kind, k), -m * c)
                if kind == "cos":
                    add((m, "sin", k + 1), -2 * c)
                elif kind == "sin":
                    add((m, "cos", k + 1), 2 * c)
            f = TrigRational(out)
        return f

    # expansion at 0

    def laurent(self, max_order: int) -> dict[int, dict[int, Fraction]]:
        """Exact Laurent coefficients at 0 through ``x**max_order``.

        Returns ``{exponent: {pi_power: rational}}``.
        """
        out: dict[int, dict[int, Fraction]] = {}

        def add(e: int, k: int, c: Fraction) -> None:
            if e <= max_order and c:
                slot = out.setdefault(e, {})
                slot[k] = slot.get(k, Fraction(0)) + c

        for (m, kind, k), c in self.terms.items():
            if kind == "const":
                add(-m, k, c)
                continue
            n = 0
            while True:
                p = 2 * n if kind == "cos" else 2 * n + 1
                e = p - m
                if e > max_order:
                    break
                sign = -1 if n % 2 else 1
                add(e, k + p, c * sign * Fraction(2**p, factorial(p)))
                n += 1
        return {e: {k: v for k, v in slot.items() if v} for e, slot in sorted(out.items())}

    def principal_part(self) -> dict[int, dict[int, Fraction]]:
        """Laurent coefficients of negative order that do not cancel."""
        return {e: slot for e, slot in self.laurent(-1).items() if slot}

    def is_regular_at_zero(self) -> bool:
        return not self.principal_part()

    def limit_at_zero(self) -> float:
        if not self.is_regular_at_zero():
            raise ValueError("expression has a pole at 0")
        return _pi_poly_value(self.laurent(0).get(0, {}))

    def _series_coefficients(self) -> np.ndarray:
        if self._series_cache is None:
            coeffs = np.zeros(SERIES_ORDER + 1)
            for e, slot in self.laurent(SERIES_ORDER).items():
                if e >= 0:
                    coeffs[e] = _pi_poly_value(slot)
            self._series_cache = coeffs
        return self._series_cache

    # evaluation

    def closed(self, x) -> np.ndarray:
        """Evaluate the closed form directly (undefined at 0 when m > 0)."""
        x = np.asarray(x, dtype=float)
        w = 2 * np.pi * x
        trig = {"const": np.ones_like(x), "cos": np.cos(w), "sin": np.sin(w)}
        out = np.zeros_like(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            for (m, kind, k), c in self.terms.items():
                out = out + float(c) * np.pi**k * x ** (-m) * trig[kind]
        return out

    def _closed_magnitude(self, x: np.ndarray) -> np.ndarray:
        mag = np.zeros_like(x)
        with np.errstate(divide="ignore", over="ignore"):
            for (m, _, k), c in self.terms.items():
                mag = mag + abs(float(c)) * np.pi**k * np.abs(x) ** (-m)
        return mag

    def series(self, x) -> np.ndarray:
        """Evaluate the Taylor series at 0 (only meaningful when regular)."""
        x = np.asarray(x, dtype=float)
        return np.polynomial.polynomial.polyval(x, self._series_coefficients())

    def _series_magnitude(self, x: np.ndarray) -> np.ndarray:
        return np.polynomial.polynomial.polyval(np.abs(x), np.abs(self._series_coefficients()))

    def __call__(self, x) -> np.ndarray | float:
        """Evaluate, picking per point the better conditioned of series and closed form.

        Each route loses roughly ``eps * sum(|terms|)``; near 0 the closed form
        cancels catastrophically while the series is benign, and the roles
        swap as ``|x|`` grows.  The series is only used inside
        ``|x| < SERIES_RADIUS`` where its truncation error is negligible.
        """
        scalar = np.ndim(x) == 0
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty_like(x)
        if self._regular is None:
            self._regular = self.is_regular_at_zero()
        if self._regular:
            near = np.abs(x) < SERIES_RADIUS
            if near.any():
                xn = x[near]
                use_series = self._series_magnitude(xn) <= self._closed_magnitude(xn)
                vals = np.where(use_series, self.series(xn), 0.0)
                if (~use_series).any():
                    vals[~use_series] = self.closed(xn[~use_series])
                out[near] = vals
            if (~near).any():
                out[~near] = self.closed(x[~near])
        else:
            out = self.closed(x)
        return float(out[0]) if scalar else out

    def evaluate_mp(self, x, dps: int = 50):
        """Closed form in extended precision (``x`` must be nonzero if poles remain)."""
        with mpmath.workdps(dps):
            x = mpmath.mpf(x)
            w = 2 * mpmath.pi * x
            trig = {"const": mpmath.mpf(1), "cos": mpmath.cos(w), "sin": mpmath.sin(w)}
            total = mpmath.mpf(0)
            for (m, kind, k), c in self.terms.items():
                total += mpmath.mpf(c.numerator) / c.denominator * mpmath.pi**k * x ** (-m) * trig[kind]
            return total


def _pi_poly_value(slot: dict[int, Fraction]) -> float:
    return float(sum(float(c) * math.pi**k for k, c in slot.items()))


def trig_derivative(f: TrigRational, order: int) -> TrigRational:
    """Exact derivative of the given order."""
    if order < 1:
        raise ValueError("order must be positive")
    return f.derivative(order)


# h_n


@lru_cache(maxsize=None)
def _cos_sin_moments(n: int) -> tuple[TrigRational, TrigRational]:
    """Closed forms of int_0^1 t^n cos(2 pi x t) dt and the matching sine integral.

    Integration by parts with w = 2 pi x:
        C_n = sin w / w - (n / w) S_{n-1},   S_n = -cos w / w + (n / w) C_{n-1}.
    """
    inv_w = dict(coeff=Fraction(1, 2), m=1, pi_power=-1)
    sin_over_w = TrigRational.term(1, "sin", -1, Fraction(1, 2))
    cos_over_w = TrigRational.term(1, "cos", -1, Fraction(1, 2))
    if n == 0:
        return sin_over_w, TrigRational.term(1, "const", -1, Fraction(1, 2)) - cos_over_w
    c_prev, s_prev = _cos_sin_moments(n - 1)
    c_n = sin_over_w - s_prev.scale(**inv_w) * n
    s_n = -cos_over_w + c_prev.scale(**inv_w) * n
    return c_n, s_n


def h_trig(n: int) -> TrigRational:
    """``h_n(x) = int_0^1 t^n cos(2 pi x t) dt`` as an exact closed form."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    return _cos_sin_moments(n)[0]


def h_eval(n: int, x):
    """Value of h_n at x (scalar or array)."""
    return h_trig(n)(x)


def h_series(n: int, x: float, dps: int | None = None):
    """h_n from its power series ``sum_m (-1)^m w^(2m) / ((2m)! (n + 2m + 1))``.

    In double precision the series is only usable for moderate ``|x|``; with
    ``dps`` set, terms are summed in mpmath at that many digits, which must
    exceed ``2 pi |x| / ln 10`` plus the wanted accuracy.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    if dps is None:
        w2 = (2 * math.pi * x) ** 2
        total, term, m = 0.0, 1.0, 0
        while True:
            contrib = term / (n + 2 * m + 1)
            total += contrib
            if m > 4 and abs(contrib) < 1e-18 * max(abs(total), 1e-300):
                return total
            m += 1
            term *= -w2 / ((2 * m - 1) * (2 * m))
            if m > 2000:
                raise ArithmeticError("series did not converge")
    with mpmath.workdps(dps):
        w2 = (2 * mpmath.pi * mpmath.mpf(x)) ** 2
        total, term, m = mpmath.mpf(0), mpmath.mpf(1), 0
        eps = mpmath.mpf(10) ** (-dps + 5)
        while True:
            contrib = term / (n + 2 * m + 1)
            total += contrib
            if m > 4 and abs(term) < eps * max(abs(total), eps):
                return total
            m += 1
            term *= -w2 / ((2 * m - 1) * (2 * m))


def h_quadrature(n: int, x: float, rtol: float = 1e-13) -> float:
    """h_n by adaptive quadrature of its defining integral."""
    return quadrature.integrate(
        lambda t: t**n * np.cos(2 * np.pi * x * t), 0.0, 1.0, rtol=rtol, atol=1e-14, initial=max(1, int(abs(x)))
    )


# kernels


@dataclass(frozen=True)
class KernelId:
    family: str
    r: int

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}")
        if self.family == "theoremA" and self.r not in (1, 2, 3):
            raise ValueError("theoremA kernels exist only for r = 1, 2, 3")
        min_r = 0 if self.family in ("Sp", "SOeven") else 1
        if self.r < min_r:
            raise ValueError(f"{self.family} needs r >= {min_r}")


def c_jr(j: int, r: int) -> Fraction:
    """Coefficient ``(1/j) C(r-1, j-1) C(r+j, j-1)`` of the symplectic kernel."""
    if not 1 <= j <= r:
        raise ValueError("need 1 <= j <= r")
    return Fraction(comb(r - 1, j - 1) * comb(r + j, j - 1), j)


_SINC = TrigRational.term(1, "sin", -1, Fraction(1, 2))


@lru_cache(maxsize=None)
def theorem_a_trig(r: int) -> TrigRational:
    one = TrigRational.constant()
    cos_minus_1 = TrigRational.term(0, "cos") - 1
    if r == 1:
        return one - _SINC
    if r == 2:
        return one + _SINC + cos_minus_1.scale(m=2, pi_power=-2)
    if r == 3:
        sin_minus_w = TrigRational.term(0, "sin") - TrigRational.term(-1, "const", 1, 2)
        last = cos_minus_1 + TrigRational.term(-2, "const", 2, 2)
        return (
            one
            - _SINC
            - cos_minus_1.scale(3, m=2, pi_power=-2)
            + sin_minus_w.scale(6, m=3, pi_power=-3)
            + last.scale(3, m=4, pi_power=-4)
        )
    raise ValueError("theoremA kernels exist only for r = 1, 2, 3")


def conjecture_d_weights(r: int, btable: BTable | None = None) -> dict[int, Fraction]:
    """Coefficients ``w_j`` with ``W_r = 1 + h_0 + sum_j w_j h_j``."""
    table = btable if btable is not None else b_table(r)
    if table.r != r:
        raise ValueError(f"b-table is for r={table.r}, kernel needs r={r}")
    top = min(2 * r - 2, r * (r - 1) // 2)
    b0 = table[0]
    return {
        j: -r * Fraction((-1) ** j * 2 ** (j + 1)) * table[j] / (factorial(j) * b0)
        for j in range(top + 1)
    }


def conjecture_d_trig(r: int, btable: BTable | None = None) -> TrigRational:
    out = TrigRational.constant() + h_trig(0)
    for j, w in conjecture_d_weights(r, btable).items():
        out = out + h_trig(j) * w
    return out


@lru_cache(maxsize=None)
def sp_trig(r: int) -> TrigRational:
    """Symplectic kernel; ``r = -1`` gives the plain even-orthogonal kernel."""
    if r < -1:
        raise ValueError("r must be >= -1")
    base = TrigRational.term(1, "const", -1, Fraction(1, 2)) - TrigRational.term(1, "cos", -1, Fraction(1, 2))
    out = TrigRational.constant() - _SINC * (2 * r + 1)
    for j in range(1, r + 1):
        coeff = Fraction(r * (r + 1), 2 ** (2 * j - 2)) * c_jr(j, r) / (2 * j - 1)
        out = out + base.derivative(2 * j - 1).scale(coeff, pi_power=-(2 * j - 1))
    return out


def kernel_trig(kid: KernelId, btable: BTable | None = None) -> TrigRational:
    if kid.family == "theoremA":
        return theorem_a_trig(kid.r)
    if kid.family == "conjectureD":
        return conjecture_d_trig(kid.r, btable)
    if kid.family == "Sp":
        return sp_trig(kid.r)
    if kid.family == "SOeven":
        return sp_trig(kid.r - 1)
    return (sp_trig(kid.r - 1) + sp_trig(kid.r)) / 2


def w_eval(kid: KernelId, x, btable: BTable | None = None):
    """Kernel value at x.

    ``conjectureD`` is evaluated as a sum of ``h_eval`` values, so it shares
    no code path with the other families beyond h_n itself.
    """
    if kid.family == "conjectureD":
        weights = conjecture_d_weights(kid.r, btable)
        out = 1 + np.asarray(h_eval(0, x))
        for j, w in weights.items():
            if w:
                out = out + float(w) * np.asarray(h_eval(j, x))
        return float(out) if np.ndim(x) == 0 else out
    if kid.family == "U":
        return 0.5 * (w_eval(KernelId("SOeven", kid.r), x) + w_eval(KernelId("Sp", kid.r), x))
    return kernel_trig(kid)(x)


# test functions


@dataclass(frozen=True)
class TestFunctionPair:
    """Even test function with compactly supported Fourier transform.

    ``phi_tail(T)`` returns ``(estimate, bound)`` for ``int_T^inf phi``:
    an estimate of the tail mass and a bound on its error.  ``phi_envelope``
    bounds ``|phi(x)|`` for ``|x| >= 1``.
    """

    __test__ = False

    delta: float
    phi: Callable[[np.ndarray], np.ndarray]
    phi_hat: Callable[[np.ndarray], np.ndarray]
    phi_tail: Callable[[float], tuple[float, float]]
    phi_envelope: Callable[[float], float]
    name: str = "custom"
    decay_constant: float = field(default=0.0)


def fejer(delta: float) -> TestFunctionPair:
    """``phi(x) = delta (sin(pi delta x) / (pi delta x))^2``, ``phi_hat(u) = (1 - |u|/delta)_+``."""
    if delta <= 0:
        raise ValueError("delta must be positive")

    def phi(x):
        return delta * np.sinc(delta * np.asarray(x, dtype=float)) ** 2

    def phi_hat(u):
        return np.clip(1 - np.abs(np.asarray(u, dtype=float)) / delta, 0.0, None)

    def tail(T):
        # phi = (1 - cos(2 pi delta x)) / (2 pi^2 delta x^2); the first part
        # integrates exactly, the oscillating part is bounded by one
        # integration by parts.
        return 1 / (2 * np.pi**2 * delta * T), 1 / (2 * np.pi**3 * delta**2 * T**2)

    return TestFunctionPair(
        delta=delta,
        phi=phi,
        phi_hat=phi_hat,
        phi_tail=tail,
        phi_envelope=lambda T: 1 / (np.pi**2 * delta * T**2),
        name=f"fejer(delta={delta})",
        decay_constant=1 / (np.pi**2 * delta),
    )


def zero_pair(delta: float = 0.5) -> TestFunctionPair:
    zeros = lambda x: np.zeros_like(np.asarray(x, dtype=float))  # noqa: E731
    return TestFunctionPair(
        delta=delta,
        phi=zeros,
        phi_hat=zeros,
        phi_tail=lambda T: (0.0, 0.0),
        phi_envelope=lambda T: 0.0,
        name="zero",
    )


class NonConvergenceError(RuntimeError):
    """The certified truncation error exceeds the requested tolerance."""


def _panel_integral(f: Callable[[np.ndarray], np.ndarray], T: float, width: float = 1.0, order: int = 24) -> float:
    panels = int(math.ceil(T / width))
    return quadrature.fixed(f, 0.0, panels * width, n=order, panels=panels)


def line_integral_even(
    pair: TestFunctionPair,
    g: Callable[[np.ndarray], np.ndarray],
    g_limit: float,
    g_bound: float,
    tail_tol: float = 1e-11,
) -> tuple[float, float]:
    """``int_R phi(x) g(x) dx`` for even ``g`` with ``|g(x) - g_limit| <= g_bound / |x|``.

    Returns ``(value, certified_truncation_error)``.  The cutoff T is chosen
    so that ``2 int_T^inf |phi| g_bound / x dx <= tail_tol``, using the
    envelope ``|phi(x)| <= decay_constant / x^2``.
    """
    if pair.decay_constant == 0 or g_bound == 0:
        T = 50.0
    else:
        T = max(50.0, math.sqrt(g_bound * pair.decay_constant / tail_tol))
    body = _panel_integral(lambda x: pair.phi(x) * g(x), T)
    tail_est, tail_err = pair.phi_tail(T)
    envelope_err = g_bound * pair.decay_constant / (2 * T**2)
    value = 2 * (body + g_limit * tail_est)
    return value, 2 * (abs(g_limit) * tail_err + envelope_err)


def fourier_moment_identity_check(pair: TestFunctionPair, n: int, tol: float = 1e-10) -> tuple[float, float]:
    """Both sides of ``int_0^inf phi_hat(u) u^n du = int_R phi(x) h_n(x) dx``.

    The left side is quadrature on the Fourier side, the right side is a
    truncated x-side quadrature with certified tail.

    Raises:
        NonConvergenceError: if the certified tail exceeds ``tol``.
    """
    if not pair.delta < 1:
        raise ValueError("identity needs support inside (-1, 1)")
    lhs = quadrature.integrate(lambda u: pair.phi_hat(u) * u**n, 0.0, pair.delta, rtol=1e-14, atol=1e-16)
    h = h_trig(n)
    rhs_full, err = line_integral_even(pair, h, 0.0, 1 / np.pi, tail_tol=tol / 10)
    if err > tol:
        raise NonConvergenceError(f"tail bound {err:.2e} exceeds {tol:.2e}")
    return lhs, rhs_full


def density_functional(kid: KernelId, pair: TestFunctionPair, btable: BTable | None = None, tol: float = 1e-10) -> float:
    """``int_R phi(x) W(x) dx`` by x-side quadrature."""
    f = kernel_trig(kid, btable)
    if {key: c for key, c in f.terms.items() if key[0] <= 0} != {(0, "const", 0): 1}:
        raise ValueError("kernel does not tend to 1 at infinity")
    bound = sum(
        abs(float(c)) * np.pi**k for (m, _, k), c in f.terms.items() if m >= 1
    )  # |W(x) - 1| <= bound / |x| for |x| >= 1
    value, err = line_integral_even(pair, f, 1.0, bound, tail_tol=tol / 10)
    if err > tol:
        raise NonConvergenceError(f"tail bound {err:.2e} exceeds {tol:.2e}")
    return value
