# %% [markdown]
# # Random matrices and prime sums
# Weighting SO(2N) samples by det(I - U)^r reproduces the twisted kernels.
# On the arithmetic side, prime sums against a band-limited test function
# approach their integral asymptotics, slowly.

# %%
from wld import kernels, primesums, rmt
from wld.rmt import RMTConfig

pair = kernels.fejer(0.5)
for r in (0, 1, 2):
    est = rmt.weighted_one_level(RMTConfig(N=20, samples=20_000, r=r, seed=1, pair=pair))
    print(f"r={r} estimate {est.weighted_mean:.4f} +- {est.std_error:.4f}  reference {est.reference:.4f}")

# %% the n = 1 sum lags well behind n = 2
table = primesums.sieve(10**7)
for n in (1, 2):
    for R in (1e6, 1e10, 1e14):
        lhs, rhs, rel = primesums.lemma41_partial_sum(n, R, pair, table)
        print(n, f"{R:.0e}", f"{lhs:.5f} {rhs:.5f} {rel:.4f}")

# %% limiting densities from the explicit formula
for r, delta in ((1, 0.5), (2, 0.25), (3, 0.5)):
    print(r, primesums.explicit_formula_rhs(r, kernels.fejer(delta)))
