"""Weighted one-level density of Haar-random SO(2N) matrices.

Each sample is weighted by ``det(I - U)^r`` and contributes the sum of a
test function over its eigenangles, rescaled to unit mean spacing.  The
weighted average is compared with ``int phi(x) W_SOeven^r(x) dx``.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .kernels import KernelId, TestFunctionPair

MAX_N = 128
JACKKNIFE_BLOCKS = 100
CHUNK = 256


class ZeroWeightError(ArithmeticError):
    """Every sample carried zero weight, so the weighted mean is undefined."""


@dataclass(frozen=True)
class RMTConfig:
    N: int
    samples: int
    r: int
    seed: int
    pair: TestFunctionPair

    def __post_init__(self):
        if self.N < 2:
            raise ValueError("N must be at least 2")
        if self.N > MAX_N:
            raise ValueError(f"N={self.N} exceeds the dense-solver limit {MAX_N}")
        if self.samples < 1:
            raise ValueError("samples must be positive")
        if self.r < 0:
            raise ValueError("r must be nonnegative")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")


@dataclass(frozen=True)
class RMTEstimate:
    weighted_mean: float
    std_error: float
    reference: float
    z_score: float


def _haar_from_gaussian(g: np.ndarray) -> np.ndarray:
    """Map stacked Gaussian matrices to Haar elements of SO(n)."""
    q, rmat = np.linalg.qr(g)
    d = np.sign(np.diagonal(rmat, axis1=-2, axis2=-1))
    if np.any(d == 0):
        raise np.linalg.LinAlgError("singular Gaussian draw")
    q = q * d[..., None, :]
    flip = np.linalg.det(q) < 0
    q[flip, 0, :] *= -1
    return q


def sample_so_even(N: int, rng: np.random.Generator) -> np.ndarray:
    """One Haar-distributed element of SO(2N)."""
    if N < 2:
        raise ValueError("N must be at least 2")
    while True:
        g = rng.standard_normal((1, 2 * N, 2 * N))
        try:
            return _haar_from_gaussian(g)[0]
        except np.linalg.LinAlgError:
            continue


def eigenangle_cosines(u: np.ndarray) -> np.ndarray:
    """cos(theta_j) for the N conjugate pairs, ascending; works on stacks.

    The symmetric part (U + U^T)/2 has each cos(theta_j) as a double
    eigenvalue, so adjacent sorted eigenvalues are averaged.
    """
    sym = 0.5 * (u + np.swapaxes(u, -1, -2))
    ev = np.linalg.eigvalsh(sym)
    return 0.5 * (ev[..., 0::2] + ev[..., 1::2])


def log_weight(cosines: np.ndarray) -> np.ndarray:
    """log det(I - U) = sum_j log(2 - 2 cos theta_j) over the pairs."""
    return np.sum(np.log(2.0 - 2.0 * cosines), axis=-1)


def weight(u: np.ndarray, r: int = 1) -> float:
    """det(I - U)^r computed from the eigenangles."""
    c = eigenangle_cosines(u)
    return float(np.prod((2.0 - 2.0 * c) ** r))


def _sample_chunk(N: int, seed: int, start: int, stop: int, pair: TestFunctionPair):
    """Statistic and log-weight for samples ``start..stop-1``.

    Every sample draws from its own stream keyed by (seed, index), so the
    output does not depend on how samples are split across workers.
    """
    size = 2 * N
    g = np.empty((stop - start, size, size))
    for k, idx in enumerate(range(start, stop)):
        g[k] = np.random.default_rng([seed, idx]).standard_normal((size, size))
    try:
        u = _haar_from_gaussian(g)
    except np.linalg.LinAlgError:
        u = np.stack([_resample(N, seed, idx) for idx in range(start, stop)])
    c = np.clip(eigenangle_cosines(u), -1.0, 1.0)
    x = np.arccos(c) * N / np.pi
    # both members of each pair: theta_j and -theta_j
    stat = 2.0 * np.sum(pair.phi(x), axis=-1)
    return stat, log_weight(c)


def _resample(N: int, seed: int, idx: int) -> np.ndarray:
    return sample_so_even(N, np.random.default_rng([seed, idx]))


def _threads(threads: int | None) -> int:
    if threads is None:
        threads = int(os.environ.get("WLD_THREADS", "0") or 0) or (os.cpu_count() or 1)
    return max(1, threads)


def simulate(N: int, samples: int, seed: int, pair: TestFunctionPair, threads: int | None = None):
    """Per-sample statistics and log-weights, in sample order."""
    bounds = [(s, min(s + CHUNK, samples)) for s in range(0, samples, CHUNK)]
    workers = _threads(threads)
    if workers == 1:
        parts = [_sample_chunk(N, seed, a, b, pair) for a, b in bounds]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda ab: _sample_chunk(N, seed, *ab, pair), bounds))
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def weighted_estimate(stat: np.ndarray, logw: np.ndarray, r: int, blocks: int = JACKKNIFE_BLOCKS) -> tuple[float, float]:
    """Self-normalized weighted mean with a block-jackknife standard error."""
    lw = r * logw
    finite = np.isfinite(lw)
    if not finite.any():
        raise ZeroWeightError("all samples have zero weight")
    w = np.where(finite, np.exp(lw - lw[finite].max()), 0.0)
    total_w = w.sum()
    if total_w == 0:
        raise ZeroWeightError("all samples have zero weight")
    ws = w * stat
    mean = float(ws.sum() / total_w)
    n = len(stat)
    nb = min(blocks, n)
    if nb < 2:
        return mean, 0.0
    edges = np.linspace(0, n, nb + 1).astype(int)
    bw = np.add.reduceat(w, edges[:-1])
    bws = np.add.reduceat(ws, edges[:-1])
    with np.errstate(invalid="ignore", divide="ignore"):
        loo = (ws.sum() - bws) / (total_w - bw)
    loo = loo[np.isfinite(loo)]
    var = (len(loo) - 1) / len(loo) * np.sum((loo - loo.mean()) ** 2)
    return mean, float(math.sqrt(var))


def reference_value(r: int, pair: TestFunctionPair) -> float:
    """``int phi(x) W_SOeven^r(x) dx``."""
    return kernels.density_functional(KernelId("SOeven", r), pair)


def _estimate(stat, logw, r, pair) -> RMTEstimate:
    mean, se = weighted_estimate(stat, logw, r)
    ref = reference_value(r, pair)
    z = (mean - ref) / se if se > 0 else math.nan
    return RMTEstimate(mean, se, ref, z)


def weighted_one_level(config: RMTConfig, threads: int | None = None) -> RMTEstimate:
    """Weighted average of ``sum_j phi(theta_j N / pi)`` over SO(2N)."""
    stat, logw = simulate(config.N, config.samples, config.seed, config.pair, threads)
    return _estimate(stat, logw, config.r, config.pair)


def weighted_one_level_multi(
    N: int, samples: int, rs: Sequence[int], seed: int, pair: TestFunctionPair, threads: int | None = None
) -> dict[int, RMTEstimate]:
    """Several weight exponents from one shared set of samples."""
    for r in rs:
        RMTConfig(N, samples, r, seed, pair)
    stat, logw = simulate(N, samples, seed, pair, threads)
    return {r: _estimate(stat, logw, r, pair) for r in rs}
