"""
Monte-Carlo over gauge annuli and the co-area radial reduction
==============================================================

Uniform samples in a bounding box of the gauge ball give volume-type
integrals; for gauge-radial integrands the co-area formula reduces them to
a one-dimensional integral times the sphere constant lambda_p.
"""

# %%
import math

import numpy as np

from subhardy.frames import make_frame
from subhardy.quadrature import mc_gauge_annulus, radial_integral, sphere_constant

# %% Ball volume in R^3 and the homogeneity law V(2)/V(1) = 2^Q on the Heisenberg group.
frame, gauge = make_frame("euclidean", 3)
one = lambda X: np.ones(X.shape[0])  # noqa: E731
print("unit ball:", mc_gauge_annulus(frame, gauge, one, 0, 1, 200_000, seed=0), "exact", 4 * math.pi / 3)

frame, gauge = make_frame("heisenberg", 1)
v1 = mc_gauge_annulus(frame, gauge, one, 0, 1, 400_000, seed=1)
v2 = mc_gauge_annulus(frame, gauge, one, 0, 2, 400_000, seed=2)
print(f"Heisenberg V(2)/V(1) = {v2.value / v1.value:.3f} (2^Q = 16)")

# %% lambda_2 on the Heisenberg group and a radial integral compared with full MC.
sc = sphere_constant(frame, gauge, 2, 400_000, seed=3)
print("lambda_2 =", sc.lambda_p)
f = lambda r: np.exp(-r) * r**2  # noqa: E731
rad = radial_integral(sc, f, 0.5, 2.0)
mc = mc_gauge_annulus(frame, gauge, lambda X: f(gauge.value(X)) * gauge.horizontal_norm(X) ** 2, 0.5, 2.0,
                      400_000, seed=4)
print(f"radial reduction {rad.value:.5f} +- {rad.stderr:.5f}   full MC {mc.value:.5f} +- {mc.stderr:.5f}")

# %% Results are deterministic and independent of the number of worker threads.
a = mc_gauge_annulus(frame, gauge, one, 0.5, 1.5, 100_000, seed=5, batch_size=8192)
b = mc_gauge_annulus(frame, gauge, one, 0.5, 1.5, 100_000, seed=5, batch_size=8192, workers=4)
print("identical across worker counts:", a == b)
