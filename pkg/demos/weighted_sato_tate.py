# %% [markdown]
# # Weighted Sato-Tate measures
# Local measures at p for twist r, with and without the harmonic weight.
# Moments in the Chebyshev basis have closed forms; the density is recovered
# from its moments through the reproducing kernel.

# %%
import numpy as np

from wld import measures
from wld.measures import MeasureSpec

specs = [MeasureSpec(p, r, h) for p in (2, 5) for r in (1, 2, 3) for h in (True, False)]
for s in specs:
    print(f"{s.label:28s} mass {measures.measure_mass(s):.15f}")

# %% quadrature moments vs closed forms
s = MeasureSpec(3, 3, True)
for ell in range(6):
    print(ell, measures.cheb_moment(s, ell), float(measures.closed_moment(s, ell)))

# %% reconstruction error shrinks with the number of terms, slowest at p = 2
x = np.linspace(-1.9, 1.9, 39)
for p in (2, 3):
    s = MeasureSpec(p, 2, False)
    exact = measures.measure_density(s, x)
    for L in (20, 60, 120):
        approx = measures.reconstruct_density(s, x, L)
        print(p, L, f"{np.max(np.abs(approx - exact)):.2e}")

# %% normalizing masses a(p, r), exact for small r
for r in range(1, 6):
    print(r, measures.a_pr(2, r), float(measures.a_pr(2, r, "quadrature")))

# %% H ratios as exact rationals
print([measures.H_ratio(3, ell) for ell in range(5)])
