"""
Formal maximizers solve the Euler-Lagrange equations
====================================================

The extremal power u = d^a satisfies the first-order equation behind the
Hardy inequality and the second-order equation behind the Rellich
inequality exactly; shifting the exponent breaks both.
"""

# %%
from subhardy import constants as C
from subhardy.frames import make_frame
from subhardy.verify import euler_lagrange_residual, unit_sphere_points

for kind, kw, p, theta in [("euclidean", dict(n=5), 2.0, 1.0), ("heisenberg", dict(n=1), 3.0, 0.5),
                           ("heisenberg", dict(n=2), 2.0, 0.0)]:
    frame, gauge = make_frame(kind, **kw)
    params = C.InequalityParams.for_frame(frame, p, theta)
    X = unit_sphere_points(frame, gauge, 100, seed=0)
    whiches = ["hardy"] + (["rellich"] if C.rellich_admissible(params, frame) else [])
    for which in whiches:
        exact = euler_lagrange_residual(frame, gauge, params, which, X).max()
        shifted = euler_lagrange_residual(frame, gauge, params, which, X, shift=0.1).min()
        print(f"{kind} {kw} {which:8s} max residual {exact:.1e}   min residual at a+0.1: {shifted:.3f}")
