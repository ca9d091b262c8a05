"""
The pointwise L^p expansion identity
====================================

For p >= 2 and real numbers f, g,

    |f|^p - |g|^p = p |g|^(p-2) g (f - g) + w^2 (f - g)^2 ,

with an explicit nonnegative weight w^2 depending on (p, f, g). This script
evaluates the weight, checks the identity on random pairs and looks at the
elementary power-sum bound that follows from it.
"""

# %%
import numpy as np

from subhardy import algebra

# %% The weight is identically one for p = 2 and grows with p.
for p in (2.0, 2.5, 3.0, 4.0, 6.0):
    print(f"p = {p:3g}:  w^2(1, -1) = {algebra.weight_squared(p, 1.0, -1.0):10.6f}   "
          f"w^2(2, 1) = {algebra.weight_squared(p, 2.0, 1.0):10.6f}")

# %% Residuals of the identity on random pairs in [-3, 3]^2.
rng = np.random.default_rng(0)
pairs = rng.uniform(-3, 3, size=(2000, 2))
for p in (2.0, 3.0, 6.0):
    worst = max(algebra.identity_residual(p, f, g) for f, g in pairs)
    print(f"p = {p:g}: max |lhs - rhs| over 2000 pairs = {worst:.2e}")

# %% The two-term bound |a+b|^p - |a|^p <= c_p (|a|^(p-1)|b| + |b|^p):
# c_p is estimated as the supremum of the scale-free ratio.
for p in (2.0, 3.0, 4.0):
    cp = algebra.cp_estimate(p)
    a, b = rng.normal(scale=3, size=(2, 100_000))
    print(f"p = {p:g}: c_p = {cp:.6f}, bound holds on 1e5 samples: "
          f"{bool(np.all(algebra.power_bound_holds(p, a, b, cp)))}")
