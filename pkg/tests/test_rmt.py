import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import linalg

from wld import checks, kernels, rmt
from wld.kernels import KernelId
from wld.rmt import RMTConfig


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 20), st.integers(0, 2**32))
def test_sample_is_special_orthogonal(N, seed):
    u = rmt.sample_so_even(N, np.random.default_rng(seed))
    assert u.shape == (2 * N, 2 * N)
    assert np.max(np.abs(u.T @ u - np.eye(2 * N))) < 1e-10
    assert abs(np.linalg.det(u) - 1) < 1e-8


def test_sample_rejects_small_N():
    with pytest.raises(ValueError):
        rmt.sample_so_even(1, np.random.default_rng(0))


def test_haar_entry_mean_is_zero():
    rng = np.random.default_rng(7)
    vals = np.array([rmt.sample_so_even(3, rng)[0, 0] for _ in range(10_000)])
    assert abs(vals.mean()) < 4 * vals.std(ddof=1) / math.sqrt(len(vals))


def test_eigenangles_match_schur_form():
    rng = np.random.default_rng(11)
    for N in (2, 5, 12):
        u = rmt.sample_so_even(N, rng)
        t, _ = linalg.schur(u, output="real")
        # 2x2 rotation blocks carry cos(theta) on their diagonal
        schur_cos = np.sort(np.diag(t)[0::2])
        assert np.allclose(np.diag(t)[0::2], np.diag(t)[1::2], atol=1e-8)
        assert np.max(np.abs(schur_cos - rmt.eigenangle_cosines(u))) < 1e-8


def test_eigenvalues_come_in_conjugate_pairs():
    u = rmt.sample_so_even(6, np.random.default_rng(3))
    ev = np.linalg.eigvals(u)
    assert np.allclose(np.sort_complex(ev), np.sort_complex(ev.conj()), atol=1e-10)


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 10), st.integers(0, 2**32), st.integers(0, 3))
def test_weight_similarity_invariant(N, seed, r):
    rng = np.random.default_rng(seed)
    u = rmt.sample_so_even(N, rng)
    v = rmt.sample_so_even(N, rng)
    w = rmt.weight(u, r)
    assert w >= 0
    assert rmt.weight(v @ u @ v.T, r) == pytest.approx(w, rel=1e-8, abs=1e-300)
    assert w == pytest.approx(np.linalg.det(np.eye(2 * N) - u) ** r, rel=1e-8, abs=1e-300)


def test_config_validation():
    pair = kernels.fejer(0.5)
    for bad in ((1, 10, 1, 0), (4, 0, 1, 0), (4, 10, -1, 0), (4, 10, 1, 2**64), (200, 10, 1, 0)):
        with pytest.raises(ValueError):
            RMTConfig(*bad, pair)


def test_fixed_seed_is_reproducible():
    cfg = RMTConfig(10, 700, 0, 1234, kernels.fejer(0.5))
    a = rmt.weighted_one_level(cfg, threads=1)
    b = rmt.weighted_one_level(cfg, threads=1)
    assert a == b
    assert math.isfinite(a.weighted_mean) and a.std_error > 0


def test_thread_count_does_not_change_samples():
    pair = kernels.fejer(0.5)
    s1, w1 = rmt.simulate(8, 900, 99, pair, threads=1)
    s3, w3 = rmt.simulate(8, 900, 99, pair, threads=3)
    assert np.array_equal(s1, s3) and np.array_equal(w1, w3)
    e1 = rmt.weighted_estimate(s1, w1, 2)
    e3 = rmt.weighted_estimate(s3, w3, 2)
    assert abs(e1[0] - e3[0]) < 1e-12


def test_single_sample_has_no_error_bar():
    est = rmt.weighted_one_level(RMTConfig(4, 1, 1, 0, kernels.fejer(0.5)), threads=1)
    assert est.std_error == 0 and math.isnan(est.z_score)


def test_weighted_estimate_plain_mean():
    rng = np.random.default_rng(0)
    stat = rng.normal(size=5000)
    mean, se = rmt.weighted_estimate(stat, rng.normal(size=5000), 0)
    assert mean == pytest.approx(stat.mean(), abs=1e-12)
    assert se == pytest.approx(stat.std() / math.sqrt(len(stat)), rel=0.2)


def test_zero_total_weight_is_flagged():
    with pytest.raises(rmt.ZeroWeightError):
        rmt.weighted_estimate(np.ones(10), np.full(10, -np.inf), 1)


def test_reference_is_so_even_functional():
    pair = kernels.fejer(0.5)
    assert rmt.reference_value(0, pair) == pytest.approx(1.25, abs=1e-9)
    assert rmt.reference_value(1, pair) == pytest.approx(kernels.density_functional(KernelId("theoremA", 1), pair), abs=1e-10)


@pytest.mark.slow
def test_weighted_density_r1_matches_theorem_kernel():
    est = checks.rmt_estimates()[1]
    target = kernels.density_functional(KernelId("theoremA", 1), kernels.fejer(0.5))
    assert abs(est.weighted_mean - target) < 3 * est.std_error


@pytest.mark.slow
def test_weighted_density_r2_within_budget():
    est = checks.rmt_estimates()[2]
    assert abs(est.weighted_mean - est.reference) < 3 * est.std_error + checks.RMT_BUDGET
