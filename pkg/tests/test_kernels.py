import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from wld import kernels
from wld.kernels import KernelId, TrigRational, c_jr, h_eval, w_eval
from wld.residues import b_table

FEW = settings(max_examples=40, deadline=None)


def bessel_density(a, x):
    """Hard-edge Bessel one-level density with parameter a, an independent oracle."""
    x = np.asarray(x, dtype=float)
    z = np.pi * np.abs(x)
    return np.pi**2 * np.abs(x) / 2 * (special.jv(a, z) ** 2 - special.jv(a + 1, z) * special.jv(a - 1, z))


# h_n


def test_h0_is_sinc():
    x = 0.7
    assert h_eval(0, x) == pytest.approx(math.sin(2 * math.pi * x) / (2 * math.pi * x), abs=1e-15)


@pytest.mark.parametrize("n", range(9))
def test_h_at_zero(n):
    assert h_eval(n, 0.0) == pytest.approx(1 / (n + 1), abs=1e-15)
    assert kernels.h_trig(n).limit_at_zero() == pytest.approx(1 / (n + 1), abs=1e-15)


def test_h3_against_scipy_quadrature():
    ref, _ = integrate.quad(lambda t: t**3 * math.cos(2 * math.pi * 0.31 * t), 0, 1, epsabs=1e-15, epsrel=1e-14)
    assert h_eval(3, 0.31) == pytest.approx(ref, abs=1e-12)


def test_h2_follows_the_defining_integral():
    # the integration-by-parts closed form, written out independently
    def h2(x):
        w = 2 * math.pi * x
        return math.sin(w) / w + 2 * math.cos(w) / w**2 - 2 * math.sin(w) / w**3

    for x in (0.3, 1.1, 4.2):
        assert h_eval(2, x) == pytest.approx(h2(x), abs=1e-13)


@FEW
@given(st.integers(0, 8), st.floats(0.05, 50.0))
def test_h_series_matches_closed_form(n, x):
    series = float(kernels.h_series(n, x, dps=30 + int(2.8 * x)))
    assert h_eval(n, x) == pytest.approx(series, abs=1e-12)
    assert h_eval(n, -x) == pytest.approx(series, abs=1e-12)


@FEW
@given(st.integers(0, 8), st.floats(0.0, 2.0))
def test_h_double_precision_series_near_zero(n, x):
    assert kernels.h_series(n, x) == pytest.approx(h_eval(n, x), abs=1e-12)


# symbolic differentiation


def test_derivative_of_reciprocal():
    f = TrigRational.term(1, "const")
    assert kernels.trig_derivative(f, 1) == TrigRational.term(2, "const", 0, -1)


def test_derivative_product_rule():
    f = TrigRational.term(1, "cos")
    expected = TrigRational.term(1, "sin", 1, -2) - TrigRational.term(2, "cos")
    assert kernels.trig_derivative(f, 1) == expected


def test_third_derivative_finite_difference():
    base = (TrigRational.term(1, "const") - TrigRational.term(1, "cos")).scale(Fraction(1, 2), pi_power=-1)
    d3 = kernels.trig_derivative(base, 3)
    # third-order central difference, in extended precision so rounding stays negligible
    with mpmath.workdps(50):
        x, h = mpmath.mpf("0.4"), mpmath.mpf("1e-8")
        f = lambda t: base.evaluate_mp(t, 50)  # noqa: E731
        fd = (f(x + 2 * h) - 2 * f(x + h) + 2 * f(x - h) - f(x - 2 * h)) / (2 * h**3)
    assert d3(0.4) == pytest.approx(float(fd), abs=1e-7)


def test_derivative_agrees_with_mpmath():
    f = kernels.sp_trig(2)
    d = kernels.trig_derivative(f, 2)
    for x in (0.37, 1.9):
        with mpmath.workdps(40):
            ref = mpmath.diff(lambda t: f.evaluate_mp(t, mpmath.mp.dps), mpmath.mpf(x), 2)
        assert d(x) == pytest.approx(float(ref), rel=1e-10)


def test_derivative_rejects_order_zero():
    with pytest.raises(ValueError):
        kernels.trig_derivative(TrigRational.constant(), 0)


# coefficients and identifiers


def test_c_jr():
    assert c_jr(1, 1) == 1
    assert all(c_jr(1, r) == 1 for r in range(1, 8))
    assert c_jr(2, 3) == 5
    for bad in ((0, 2), (3, 2)):
        with pytest.raises(ValueError):
            c_jr(*bad)


def test_kernel_id_validation():
    with pytest.raises(ValueError):
        KernelId("theoremA", 4)
    with pytest.raises(ValueError):
        KernelId("GUE", 1)
    with pytest.raises(ValueError):
        KernelId("conjectureD", 0)
    KernelId("SOeven", 0)


def test_conjecture_d_rejects_wrong_table():
    with pytest.raises(ValueError):
        w_eval(KernelId("conjectureD", 3), 0.5, btable=b_table(2))


# kernel values


def test_theorem_a_examples():
    assert w_eval(KernelId("theoremA", 1), 0.5) == pytest.approx(1.0, abs=1e-15)
    for r in (1, 2, 3):
        f = kernels.theorem_a_trig(r)
        assert f.is_regular_at_zero()
        assert f.limit_at_zero() == 0
        assert w_eval(KernelId("theoremA", r), 1e-9) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("x", [0.1, 0.5, 1.3])
def test_conjecture_d_matches_theorem_a_r3(x):
    assert w_eval(KernelId("conjectureD", 3), x) == pytest.approx(w_eval(KernelId("theoremA", 3), x), abs=1e-10)


@pytest.mark.parametrize("r", range(0, 5))
def test_so_even_matches_bessel_oracle(r):
    x = np.linspace(0.01, 6.0, 150)
    assert np.max(np.abs(w_eval(KernelId("SOeven", r), x) - bessel_density(r - 0.5, x))) < 1e-12


@pytest.mark.parametrize("r", range(0, 5))
def test_sp_matches_bessel_oracle(r):
    x = np.linspace(0.01, 6.0, 150)
    assert np.max(np.abs(w_eval(KernelId("Sp", r), x) - bessel_density(r + 0.5, x))) < 1e-12


@pytest.mark.parametrize("r", range(1, 5))
def test_unitary_is_average(r):
    x = np.linspace(-4, 4, 81)
    avg = 0.5 * (w_eval(KernelId("SOeven", r), x) + w_eval(KernelId("Sp", r), x))
    assert np.max(np.abs(w_eval(KernelId("U", r), x) - avg)) < 1e-14


ALL_KERNELS = (
    [KernelId("theoremA", r) for r in (1, 2, 3)]
    + [KernelId("conjectureD", r) for r in range(1, 7)]
    + [KernelId(f, r) for f in ("Sp", "SOeven", "U") for r in range(1, 6)]
)


@pytest.mark.parametrize("kid", ALL_KERNELS, ids=lambda k: f"{k.family}-{k.r}")
def test_kernels_regular_and_accurate_near_zero(kid):
    f = kernels.kernel_trig(kid)
    assert f.is_regular_at_zero()
    for x in (1e-3, 0.02, 0.05, 0.1, 0.7):
        assert w_eval(kid, x) == pytest.approx(float(f.evaluate_mp(x, 80)), abs=1e-12)


@FEW
@given(st.sampled_from(ALL_KERNELS), st.floats(0.0, 30.0))
def test_kernels_even(kid, x):
    assert w_eval(kid, x) == pytest.approx(w_eval(kid, -x), abs=1e-13)


def test_small_r_limits():
    for r in (1, 2, 3):
        assert kernels.kernel_trig(KernelId("SOeven", r)).limit_at_zero() == pytest.approx(0.0, abs=1e-15)
    assert kernels.kernel_trig(KernelId("SOeven", 0)).limit_at_zero() == pytest.approx(2.0)


# Fourier side


def test_fejer_pair_values():
    pair = kernels.fejer(0.5)
    assert pair.phi(0.0) == pytest.approx(0.5)
    assert pair.phi_hat(np.array([0.0, 0.25, 0.5, 0.7])).tolist() == [1.0, 0.5, 0.0, 0.0]


@FEW
@given(st.floats(0.05, 2.0), st.floats(-10, 10))
def test_fejer_support_and_evenness(delta, u):
    pair = kernels.fejer(delta)
    if abs(u) >= delta:
        assert pair.phi_hat(u) == 0
    assert pair.phi_hat(u) == pair.phi_hat(-u)
    assert pair.phi(u) == pair.phi(-u)


def test_fejer_rejects_nonpositive_delta():
    with pytest.raises(ValueError):
        kernels.fejer(0.0)


def test_fourier_identity_examples():
    pair = kernels.fejer(0.5)
    lhs1, _ = kernels.fourier_moment_identity_check(pair, 1)
    lhs0, _ = kernels.fourier_moment_identity_check(pair, 0)
    assert lhs1 == pytest.approx(1 / 24, abs=1e-14)
    assert lhs0 == pytest.approx(0.25, abs=1e-14)
    for n in range(4):
        lhs, rhs = kernels.fourier_moment_identity_check(pair, n)
        assert abs(lhs - rhs) < 1e-8


def test_fourier_identity_needs_small_support():
    with pytest.raises(ValueError):
        kernels.fourier_moment_identity_check(kernels.fejer(1.0), 0)


def test_density_functional_zero_pair():
    assert kernels.density_functional(KernelId("theoremA", 1), kernels.zero_pair()) == 0


def test_density_functional_closed_forms():
    # Fejer moments: phi_hat(0) = 1, phi(0) = delta, int u phi_hat = delta^2/6, int u^3 phi_hat = delta^4/20
    d = 0.25
    expected2 = 1 - 1.5 * d + 4 * d**2 / 6
    assert kernels.density_functional(KernelId("theoremA", 2), kernels.fejer(d)) == pytest.approx(expected2, abs=1e-8)
    d = 0.5
    expected3 = 1 - 2.5 * d + 12 * d**2 / 6 - 8 * d**4 / 20
    assert kernels.density_functional(KernelId("theoremA", 3), kernels.fejer(d)) == pytest.approx(expected3, abs=1e-8)
    assert kernels.density_functional(KernelId("SOeven", 0), kernels.fejer(d)) == pytest.approx(1 + d / 2, abs=1e-8)
