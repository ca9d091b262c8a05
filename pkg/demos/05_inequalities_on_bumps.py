"""
Hardy chains and Rellich checks on random test functions
========================================================

A random bump is smooth, compactly supported in a gauge annulus and not
gauge-radial, so the three terms of the Hardy chain

    c int |u|^p d^(-p theta) |D|^p  <=  int |G.D/|D||^p d^(-p(theta-1))  <=  int |G|^p d^(-p(theta-1))

are estimated jointly by Monte Carlo (D = grad_L d, G = grad_L u).
"""

# %%
from subhardy import constants as C
from subhardy.frames import make_frame
from subhardy.testfns import make_random_bump
from subhardy.verify import QuadSettings, auxiliary_hardy_check, hardy_chain, rellich_check

quad = QuadSettings(n_samples=50_000, seed=0)

# %% Hardy chains on four frames.
for kind, kw in [("euclidean", dict(n=5)), ("heisenberg", dict(n=1)),
                 ("heisenberg_greiner", dict(n=1, gamma=2.0)), ("baouendi_grushin", dict(n=2, k=1, gamma=1.0))]:
    frame, gauge = make_frame(kind, **kw)
    params = C.InequalityParams.for_frame(frame, 2.0, 1.0)
    rep = hardy_chain(frame, gauge, params, make_random_bump(gauge, seed=1), quad)
    print(f"{kind:19s} lhs={rep.lhs.value:9.4f} mid={rep.mid.value:9.4f} rhs={rep.rhs.value:9.4f} "
          f"quotient={rep.quotient:8.3f} >= {rep.sharp_constant:.4f}: {rep.verdict}")

# %% The auxiliary Hardy and Rellich inequalities where they apply.
frame, gauge = make_frame("euclidean", 5)
params = C.InequalityParams.for_frame(frame, 2.0, 0.0)
u = make_random_bump(gauge, seed=2)
print("auxiliary:", auxiliary_hardy_check(frame, gauge, params, u, quad).to_dict()["quotient"])
print("rellich:  ", rellich_check(frame, gauge, params, u, quad).to_dict()["quotient"], ">= 1.5625")

# %% On the first Heisenberg group the Rellich inequality needs Q > 2p, which fails for p = 2.
frame, gauge = make_frame("heisenberg", 1)
try:
    rellich_check(frame, gauge, C.InequalityParams.for_frame(frame, 2.0, 0.0), make_random_bump(gauge, 3), quad)
except C.InadmissibleParameters as exc:
    print("rejected:", exc.reasons)
