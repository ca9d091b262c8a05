"""
Frames, gauges and the p-sub-Laplacian
======================================

Each frame is a family of vector fields X_1..X_h on R^N given by a matrix
sigma(x); the gauge d is homogeneous of degree one under the frame's
dilations. Two facts drive every inequality in this package:

* the gauge identity  L_p d = (Q - 1) |grad_L d|^p / d, and
* the L_p-harmonicity of Gamma_p = d^((p-Q)/(p-1)) away from the origin.

Both are checked here with analytic derivatives (no finite differences).
"""

# %%
import numpy as np

from subhardy.frames import apply_Lp, make_frame, random_points
from subhardy.testfns import make_fundamental
from subhardy.verify import harmonicity_audit

# %% Frame data.
for kind, kw in [("euclidean", dict(n=3)), ("heisenberg", dict(n=1)),
                 ("heisenberg_greiner", dict(n=1, gamma=2.0)), ("baouendi_grushin", dict(n=1, k=1, gamma=1.0))]:
    frame, gauge = make_frame(kind, **kw)
    print(f"{kind:19s} N={frame.N} h={frame.h} Q={frame.Q:g} dilation exponents={frame.dilation_exponents}")

# %% Homogeneity of the Koranyi norm and psi = |grad_H rho|^2 in [0, 1].
frame, gauge = make_frame("heisenberg", 1)
X = random_points(frame, gauge, 5, seed=1)
for lam in (0.5, 3.0):
    print(f"lambda={lam}: max |rho(delta x) - lambda rho(x)| =",
          np.abs(gauge.value(frame.dilate(X, lam)) - lam * gauge.value(X)).max())
print("psi at sample points:", np.round(gauge.horizontal_norm(X) ** 2, 4))

# %% L_p Gamma_p at a few points of the Heisenberg group.
for p in (2.0, 3.0, 4.0):
    print(f"p={p:g}: |L_p Gamma_p| =", np.abs(apply_Lp(frame, gauge, p, make_fundamental(gauge, p), X)).max())

# %% The full audit across frames.
for kind, kw in [("heisenberg_greiner", dict(n=1, gamma=2.0)), ("baouendi_grushin", dict(n=1, k=1, gamma=1.0))]:
    frame, gauge = make_frame(kind, **kw)
    rep = harmonicity_audit(frame, gauge, (2, 3, 4), n_points=500, seed=0)
    print(kind, {p: f"{v['max_abs_Lp_Gamma']:.1e}" for p, v in rep.per_p.items()}, rep.to_dict()["verdict"])
