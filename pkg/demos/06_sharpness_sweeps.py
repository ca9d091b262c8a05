"""
Sharpness: extremal sequences and the extrapolated constant
===========================================================

u_eps = d^a g_eps(d) with the extremal exponent a and the smooth cut-off
g_eps has Rayleigh quotient R(eps) = (c L + A)/(L + B), L = -ln(4 eps^2),
so R decreases to the sharp constant c at a logarithmic rate. The sweep uses
the co-area reduction, so the sphere constant cancels exactly.
"""

# %%
from subhardy import constants as C
from subhardy.frames import make_frame
from subhardy.verify import sharpness_sweep

grid = (1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 1e-4)

# %% Euclidean N=5, p=2, theta=1: the constant is 2.25.
frame, gauge = make_frame("euclidean", 5)
rep = sharpness_sweep(frame, gauge, C.InequalityParams.for_frame(frame, 2, 1), "hardy", grid)
print("eps        L        R(eps)")
for eps, L, q, _ in rep.csv_rows():
    print(f"{eps:8.0e} {L:8.3f} {q:12.8f}")
print(f"fitted c = {rep.fitted_constant:.10f}  (sharp {rep.sharp_constant})  model {rep.fit_model}")

# %% Heisenberg n=1, p=3, theta=1 (constant 1/27) and the Rellich constant 9 on the second Heisenberg group.
for kw, which, p, theta in [(dict(n=1), "hardy", 3, 1), (dict(n=2), "rellich", 2, 0)]:
    frame, gauge = make_frame("heisenberg", **kw)
    rep = sharpness_sweep(frame, gauge, C.InequalityParams.for_frame(frame, p, theta), which, grid)
    print(f"heisenberg n={kw['n']} {which}: fitted {rep.fitted_constant:.8f} vs {rep.sharp_constant:.8f}, "
          f"R(1e-4) = {rep.quotients[-1].value:.6f}, verdict {rep.to_dict()['verdict']}")
