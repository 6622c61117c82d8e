"""Named verification checks shared by ``wld verify`` and the test suite.

Each criterion function returns a list of :class:`Check` records.  A check
passes when its measured value is within tolerance and it finished within
its time budget.
"""
from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable

import numpy as np

from . import kernels, measures, primesums, residues, rmt
from .kernels import KernelId


@dataclass
class Check:
    name: str
    criterion: int
    passed: bool
    measured: float
    tolerance: float
    seconds: float
    time_limit: float
    detail: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


class _Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.start


def _check(name, criterion, ok, measured, tolerance, timer, limit, detail="") -> Check:
    within = timer.seconds <= limit
    if not within:
        detail = (detail + "; " if detail else "") + f"took {timer.seconds:.1f}s > {limit}s"
    return Check(name, criterion, bool(ok and within), float(measured), float(tolerance), timer.seconds, limit, detail)


# reference residue tables, all other j zero
B_REFERENCE = {
    2: {0: Fraction(8), 1: Fraction(4)},
    3: {0: Fraction(8), 1: Fraction(8), 3: Fraction(-8)},
    4: {0: Fraction(64, 45), 1: Fraction(32, 15), 3: Fraction(-16, 3), 5: Fraction(16)},
}


def b_table_exact() -> list[Check]:
    out = []
    for r, expected in B_REFERENCE.items():
        with _Timer() as t:
            table = residues.b_table(r)
        got = table.nonzero()
        wrong = sorted(set(got) ^ set(expected) | {j for j in got.keys() & expected.keys() if got[j] != expected[j]})
        out.append(_check(f"b-table r={r}", 1, not wrong, len(wrong), 0, t, 1.0, f"mismatched j: {wrong}" if wrong else ""))
    return out


def vanishing_laws(r_max: int = 6) -> list[Check]:
    out = []
    for r in range(2, r_max + 1):
        with _Timer() as t:
            top = min(2 * r - 2, r * (r - 1) // 2)
            bad = [j for j in range(2, 2 * r - 1, 2) if residues.b_coefficient(r, j) != 0]
            bad += [j for j in range(top + 1, 2 * r + 3) if residues.b_coefficient(r, j) != 0]
        out.append(_check(f"vanishing r={r}", 2, not bad, len(bad), 0, t, 30.0, f"nonzero at j={bad}" if bad else ""))
    return out


def kernel_agreement() -> list[Check]:
    x = np.linspace(-5.0, 5.0, 200)
    out = []
    pairs = [(r, "theoremA") for r in (1, 2, 3)] + [(r, "SOeven") for r in (1, 2, 3, 4)]
    for r, other in pairs:
        with _Timer() as t:
            diff = np.max(np.abs(kernels.w_eval(KernelId("conjectureD", r), x) - kernels.w_eval(KernelId(other, r), x)))
        out.append(_check(f"kernel conjectureD vs {other} r={r}", 3, diff < 1e-10, diff, 1e-10, t, 10.0))
    return out


H_GRID = np.concatenate([[0.0, 1e-3, 0.02, 0.05, 0.3, 0.5, 1.0, 2.4, 2.6], np.linspace(3.0, 50.0, 48)])


def h_routes(n_max: int = 8, grid: np.ndarray = H_GRID) -> list[Check]:
    """Series, closed form and quadrature of h_n, plus the production evaluator."""
    out = []
    for n in range(n_max + 1):
        with _Timer() as t:
            worst = 0.0
            closed = kernels.h_trig(n)
            prod = kernels.h_eval(n, grid)
            for x, fast in zip(grid, prod):
                dps = 25 + int(2.8 * abs(x))
                series = float(kernels.h_series(n, x, dps=dps))
                exact = float(closed.evaluate_mp(x, 60)) if x else float(closed.limit_at_zero())
                quad = kernels.h_quadrature(n, x)
                vals = (series, exact, quad, float(fast))
                worst = max(worst, max(vals) - min(vals))
        out.append(_check(f"h_{n} routes", 4, worst < 1e-10, worst, 1e-10, t, 10.0))
    return out


def fourier_identity() -> list[Check]:
    out = []
    for delta in (0.25, 0.5, 0.75):
        pair = kernels.fejer(delta)
        for n in range(4):
            with _Timer() as t:
                lhs, rhs = kernels.fourier_moment_identity_check(pair, n)
            diff = abs(lhs - rhs)
            out.append(_check(f"fourier identity delta={delta} n={n}", 5, diff < 1e-8, diff, 1e-8, t, 30.0))
    return out


MEASURE_PRIMES = (2, 3, 4, 5, 25)


def measure_suite(ell_max: int = 10) -> list[Check]:
    out = []
    grid = np.linspace(-2.0, 2.0, 2001)
    for p in MEASURE_PRIMES:
        for harmonic in (True, False):
            for r in (1, 2, 3):
                spec = measures.MeasureSpec(p, r, harmonic)
                with _Timer() as t:
                    mass_err = abs(measures.measure_mass(spec) - 1)
                    positive = bool(np.all(measures.measure_density(spec, grid) > 0))
                    moment_err = max(
                        abs(measures.cheb_moment(spec, ell) - measures.closed_moment(spec, ell))
                        for ell in range(ell_max + 1)
                    )
                worst = max(mass_err, moment_err)
                ok = positive and worst < 1e-10
                detail = "" if positive else "density not strictly positive"
                out.append(_check(f"measure {spec.label}", 6, ok, worst, 1e-10, t, 60.0, detail))
    return out


def appendix_h_ratio(ell_max: int = 8) -> list[Check]:
    out = []
    for p in (2, 3, 5):
        with _Timer() as t:
            bad = [ell for ell in range(ell_max + 1) if measures.H_ratio(p, ell) != measures.H_ratio_closed(p, ell)]
        out.append(_check(f"H ratio p={p}", 7, not bad, len(bad), 0, t, 5.0, f"mismatch at ell={bad}" if bad else ""))
    return out


def a_pr_agreement(r_max: int = 8) -> list[Check]:
    out = []
    for p in (2, 3, 5, 7):
        with _Timer() as t:
            worst = 0.0
            for r in range(1, r_max + 1):
                closed = float(measures.a_pr(p, r, "closed"))
                for method in ("hypergeometric", "quadrature"):
                    worst = max(worst, abs(measures.a_pr(p, r, method) - closed) / closed)
            branches = measures.a_pr_closed_branches(p, 3)
            exact_ok = branches["power"] == branches["binomial"] and all(
                measures.a_pr(p, r) == (1 - Fraction(1, p)) ** (-(r * (r - 1) // 2)) for r in (1, 2, 3)
            )
        ok = exact_ok and worst < 1e-10
        out.append(_check(f"a(p,r) p={p}", 8, ok, worst, 1e-10, t, 10.0, "" if exact_ok else "exact branch mismatch"))
    return out


GEN_X = (-1.8, -0.9, 0.0, 0.9, 1.8)
GEN_T = (-0.6, -0.3, 0.1, 0.4, 0.7)


def generating_series() -> list[Check]:
    out = []
    for kind in measures.GENERATING_KINDS:
        with _Timer() as t:
            worst = 0.0
            for x in GEN_X:
                for tt in GEN_T:
                    series, closed = measures.generating_series_check(kind, x, tt)
                    worst = max(worst, abs(series - closed) / max(1.0, abs(closed)))
        out.append(_check(f"generating series {kind}", 9, worst < 1e-12, worst, 1e-12, t, 5.0))
    return out


RMT_N, RMT_SAMPLES, RMT_SEED, RMT_BUDGET = 40, 200_000, 20261019, 0.02


@lru_cache(maxsize=4)
def rmt_estimates(samples: int = RMT_SAMPLES, threads: int | None = None) -> dict[int, rmt.RMTEstimate]:
    """The r = 1, 2 estimates of the reference configuration, computed once per process."""
    return rmt.weighted_one_level_multi(RMT_N, samples, (1, 2), RMT_SEED, kernels.fejer(0.5), threads)


def rmt_reproduction(samples: int = RMT_SAMPLES, threads: int | None = None) -> list[Check]:
    with _Timer() as t:
        est = rmt_estimates(samples, threads)
    out = []
    for r, e in est.items():
        tol = 3 * e.std_error + RMT_BUDGET
        dev = abs(e.weighted_mean - e.reference)
        detail = f"estimate={e.weighted_mean:.6f} reference={e.reference:.6f} std_error={e.std_error:.2e} z={e.z_score:.2f}"
        out.append(_check(f"rmt r={r}", 10, dev < tol, dev, tol, t, 600.0, detail))
    return out


LEMMA41_R = 1e14
LEMMA41_LIMIT = 10**7
LEMMA41_SWEEP = (1e6, 1e8, 1e10, 1e12, 1e14)


def lemma41(table: primesums.PrimeTable | None = None) -> list[Check]:
    pair = kernels.fejer(0.5)
    out = []
    with _Timer() as t:
        table = table or primesums.sieve(LEMMA41_LIMIT)
    for n in (1, 2):
        with _Timer() as tn:
            _, _, rel = primesums.lemma41_partial_sum(n, LEMMA41_R, pair, table)
            sweep = [primesums.lemma41_partial_sum(n, R, pair, table)[2] for R in LEMMA41_SWEEP]
        tn.seconds += t.seconds
        out.append(_check(f"lemma41 n={n} R=1e14", 11, rel < 0.1, rel, 0.1, tn, 60.0))
        steps_ok = all(b < 2 * a for a, b in zip(sweep, sweep[1:])) and sweep[-1] < sweep[0]
        trend = ", ".join(f"{v:.4f}" for v in sweep)
        out.append(_check(f"lemma41 n={n} sweep trend", 11, steps_ok, sweep[-1] / sweep[0], 1.0, tn, 60.0, trend))
    return out


EXPLICIT_DELTAS = {1: (0.25, 0.5), 2: (0.125, 0.25), 3: (0.25, 0.5)}


def explicit_formula() -> list[Check]:
    out = []
    for r, deltas in EXPLICIT_DELTAS.items():
        for delta in deltas:
            pair = kernels.fejer(delta)
            with _Timer() as t:
                rhs = primesums.explicit_formula_rhs(r, pair)
                kernel_side = kernels.density_functional(KernelId("theoremA", r), pair)
            diff = abs(rhs - kernel_side)
            out.append(_check(f"explicit formula r={r} delta={delta}", 12, diff < 1e-8, diff, 1e-8, t, 10.0))
    return out


FAST: list[Callable[[], list[Check]]] = [
    b_table_exact,
    vanishing_laws,
    kernel_agreement,
    h_routes,
    fourier_identity,
    measure_suite,
    appendix_h_ratio,
    a_pr_agreement,
    generating_series,
    explicit_formula,
]
FULL: list[Callable[[], list[Check]]] = FAST + [lemma41, rmt_reproduction]


def run(level: str = "fast", threads: int | None = None) -> list[Check]:
    if level not in ("fast", "full"):
        raise ValueError("level must be 'fast' or 'full'")
    results = []
    for suite in FAST if level == "fast" else FULL:
        results.extend(suite(threads=threads) if suite is rmt_reproduction else suite())
    return results
