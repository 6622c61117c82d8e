# %% [markdown]
# # Weighted density kernels
# The residue coefficients b_r(j) assemble into a kernel W_r.  For small r it
# coincides with the SO(even) Bessel kernel of the same twist.

# %%
import numpy as np

from wld import kernels, residues
from wld.kernels import KernelId

for r in range(1, 6):
    print(r, residues.b_table(r).nonzero())

# %% odd j only, and nothing past r(r-1)/2
for r in range(2, 7):
    top = min(2 * r - 2, r * (r - 1) // 2)
    print(r, top, sorted(residues.b_table(r).nonzero()))

# %% conjectural kernel vs SO(even)
x = np.linspace(-4, 4, 801)
for r in (1, 2, 3, 4):
    gap = np.max(np.abs(kernels.w_eval(KernelId("conjectureD", r), x) - kernels.w_eval(KernelId("SOeven", r), x)))
    print(f"r={r}  max gap {gap:.2e}")

# %% the closed form, as a sum of trig terms over powers of x
print(kernels.kernel_trig(KernelId("theoremA", 2)))

# %% weighting pushes mass away from the origin
for r in range(4):
    w = kernels.w_eval(KernelId("SOeven", r), np.array([0.05, 0.25, 0.5, 1.0]))
    print(r, np.round(w, 4))

# %% integrals against a Fejer pair
pair = kernels.fejer(0.5)
for r in range(4):
    print(r, kernels.density_functional(KernelId("SOeven", r), pair))
