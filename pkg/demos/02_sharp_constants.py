"""
Sharp constants, extremal exponents and Rellich admissibility
=============================================================

The sharp Hardy, auxiliary Hardy and Rellich constants depend only on
(p, theta, Q). Whether the Rellich inequality applies also depends on the
frame: the Heisenberg family needs Q > 2p, Greiner and Grushin frames have
their own integrability conditions.
"""

# %%
import warnings

from subhardy import constants as C
from subhardy.frames import make_frame

# %% A few settings side by side.
cases = [
    ("euclidean", dict(n=5), 2.0, 1.0),
    ("euclidean", dict(n=5), 2.0, 0.0),
    ("heisenberg", dict(n=1), 3.0, 1.0),
    ("heisenberg", dict(n=1), 2.0, 0.0),
    ("heisenberg", dict(n=2), 2.0, 0.0),
    ("heisenberg_greiner", dict(n=1, gamma=2.0), 2.0, 0.0),
    ("baouendi_grushin", dict(n=2, k=1, gamma=1.0), 2.0, 0.0),
]
for kind, kw, p, theta in cases:
    frame, _ = make_frame(kind, **kw)
    params = C.InequalityParams.for_frame(frame, p, theta)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", C.CriticalWeightWarning)  # zero constants are listed in sc.critical
        sc = C.sharp_constants(params, frame)
    adm = sc.rellich_admissibility
    rellich = f"{sc.rellich:.6g}" if adm.ok else "inadmissible (" + "; ".join(adm.reasons) + ")"
    print(f"{kind:19s} Q={frame.Q:4g} p={p:g} theta={theta:g}:  hardy={sc.hardy:.6g}  "
          f"auxiliary={sc.auxiliary_hardy:.6g}  rellich={rellich}")

# %% At the critical weight theta = Q/p the Hardy constant vanishes; the
# library returns 0 and emits a CriticalWeightWarning.
with warnings.catch_warnings(record=True) as caught:
    warnings.simplefilter("always")
    print("Euclidean N=4, p=2, theta=2:", C.hardy_sharp_constant(C.InequalityParams(2, 2, 4)))
print("warning:", caught[0].message)

# %% Extremal exponents: u = d^a is the formal (non-admissible) maximizer.
params = C.InequalityParams(2.0, 1.0, 5.0)
print("Hardy / Rellich extremal exponents for Euclidean N=5, p=2, theta=1:", C.extremal_exponents(params))
