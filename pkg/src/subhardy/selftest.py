"""Fixed-seed battery of property checks covering every module (desk-scale sizes)."""

from __future__ import annotations

import math
import warnings

import numpy as np

from . import algebra, constants as C
from .frames import apply_L, heisenberg_sublaplacian, make_frame, random_points
from .testfns import cutoff_moments, make_random_bump
from .verify import QuadSettings, euler_lagrange_residual, hardy_chain, harmonicity_audit, sharpness_sweep

SETTINGS = (
    ("euclidean", dict(n=5)),
    ("heisenberg", dict(n=1)),
    ("heisenberg_greiner", dict(n=1, gamma=2.0)),
    ("baouendi_grushin", dict(n=2, k=1, gamma=1.0)),
)


def _check(name, ok, **detail):
    return {"name": name, "pass": bool(ok), **detail}


def run_selftest(seed: int = 0, samples: int = 20_000) -> list:
    """Run the battery and return one record per check."""
    rng = np.random.default_rng(seed)
    out = []

    f, g = rng.uniform(-3, 3, size=(2, 200))
    for p in (2.0, 3.0, 4.5):
        worst = max(algebra.identity_residual(p, a, b) for a, b in zip(f, g))
        out.append(_check(f"identity p={p:g}", worst <= (1e-12 if p == 2 else 1e-8), max_residual=worst))

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", C.CriticalWeightWarning)
        spots = [
            (C.hardy_sharp_constant(C.InequalityParams(2, 1, 5)), 2.25),
            (C.rellich_sharp_constant(C.InequalityParams(2, 0, 5)), 1.5625),
            (C.auxiliary_hardy_constant(C.InequalityParams(2, 0, 5)), 0.25),
            (C.rellich_sharp_constant(C.InequalityParams(2, 0, 6)), 9.0),
            (C.hardy_sharp_constant(C.InequalityParams(3, 1, 4)), 1 / 27),
            (C.auxiliary_hardy_constant(C.InequalityParams(2, -1, 4)), 1.0),
        ]
    out.append(_check("constant spot values", all(math.isclose(a, b, rel_tol=1e-12) for a, b in spots),
                      values=[a for a, _ in spots]))

    for kind, kw in SETTINGS:
        frame, gauge = make_frame(kind, **kw)
        label = kind + str(sorted(kw.items()))
        rep = harmonicity_audit(frame, gauge, (2, 3, 4), 200, seed)
        out.append(_check(f"harmonicity {label}", rep.passed, report=rep.per_p))

        X = random_points(frame, gauge, 200, seed)
        lam = 2.0
        hom = float(np.max(np.abs(gauge.value(frame.dilate(X, lam)) - lam * gauge.value(X))))
        out.append(_check(f"gauge homogeneity {label}", hom <= 1e-12, max_error=hom))

        params = C.InequalityParams.for_frame(frame, 2, 1)
        u = make_random_bump(gauge, seed, (0.5, 2.0))
        chain = hardy_chain(frame, gauge, params, u, QuadSettings(samples, seed))
        out.append(_check(f"hardy chain {label}", chain.passed, quotient=chain.quotient,
                          constant=chain.sharp_constant))

        sweep = sharpness_sweep(frame, gauge, params, "hardy")
        out.append(_check(f"hardy sweep {label}", sweep.passed, fitted=sweep.fitted_constant,
                          constant=sweep.sharp_constant))

        el = float(np.max(euler_lagrange_residual(frame, gauge, params, "hardy", X[:50])))
        out.append(_check(f"hardy maximizer {label}", el <= 1e-8, max_residual=el))

    frame, gauge = make_frame("heisenberg", n=1)
    u = make_random_bump(gauge, seed + 1, (0.5, 2.0))
    X = random_points(frame, gauge, 50, seed)
    gap = float(np.max(np.abs(apply_L(frame, u, X) - heisenberg_sublaplacian(frame, u, X))))
    out.append(_check("heisenberg decomposition", gap <= 1e-6 * (1 + float(np.max(np.abs(apply_L(frame, u, X))))),
                      max_gap=gap))

    for eps in (1e-2, 1e-3):
        m1 = cutoff_moments(eps, 2.0).log_mass
        L = -math.log(4 * eps * eps)
        out.append(_check(f"cut-off first moment eps={eps:g}", L <= m1 <= L + 2 * math.log(2), value=m1))
    return out
