"""Pointwise L^p expansion identity and the power-sum bounds used in the
sharpness estimates.

For p >= 2 and reals f, g::

    w(p, f, g)^2 (f - g)^2 = |f|^p + (p - 1)|g|^p - p |g|^(p-2) g f

with ``w^2 = p (p - 1) * int_0^1 s |s g + (1 - s) f|^(p-2) ds``.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
from scipy import integrate, optimize

QUAD_EPSREL = 5e-14


def _check_exponent(p: float) -> float:
    p = float(p)
    if not math.isfinite(p) or p < 2:
        raise ValueError(f"exponent p must be a finite real >= 2, got {p!r}")
    return p


def _check_finite(*values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise ValueError(f"expected finite real input, got {v!r}")


def weight_squared(p: float, f: float, g: float) -> float:
    """Return ``w(p, f, g)**2``.

    Closed forms are used for p = 2 and when either argument vanishes;
    otherwise the integral is computed by adaptive quadrature, split at
    the zero of ``s g + (1 - s) f`` when it lies inside (0, 1).
    """
    p = _check_exponent(p)
    f, g = float(f), float(g)
    _check_finite(f, g)
    if p == 2:
        return 1.0 if (f, g) != (0.0, 0.0) else 0.0
    if f == 0 and g == 0:
        return 0.0
    if f == 0:
        # int_0^1 s^(p-1) |g|^(p-2) ds = |g|^(p-2) / p
        return (p - 1) * abs(g) ** (p - 2)
    if g == 0:
        # int_0^1 s (1-s)^(p-2) ds = 1 / (p (p-1))
        return abs(f) ** (p - 2)

    def integrand(s):
        return s * abs(s * g + (1 - s) * f) ** (p - 2)

    breaks = [0.0, 1.0]
    if f != g:
        root = f / (f - g)
        if 0 < root < 1:
            breaks = [0.0, root, 1.0]
    total = 0.0
    with warnings.catch_warnings():
        # near machine precision quadpack reports roundoff; the result is still accurate
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for a, b in zip(breaks[:-1], breaks[1:]):
            val, _ = integrate.quad(integrand, a, b, epsabs=0.0, epsrel=QUAD_EPSREL, limit=200)
            total += val
    return p * (p - 1) * total


def pointwise_weight_w(p: float, f: float, g: float) -> float:
    """Nonnegative weight ``w(p, f, g)``; zero exactly when f = g = 0."""
    return math.sqrt(weight_squared(p, f, g))


def identity_rhs(p: float, f: float, g: float) -> float:
    """``|f|^p + (p-1)|g|^p - p |g|^(p-2) g f`` evaluated directly."""
    p = _check_exponent(p)
    _check_finite(f, g)
    if g == 0:
        cross = 0.0
    else:
        cross = abs(g) ** (p - 2) * g * f
    return abs(f) ** p + (p - 1) * abs(g) ** p - p * cross


def identity_residual(p: float, f: float, g: float) -> float:
    """Absolute gap between ``w^2 (f-g)^2`` and the expanded right-hand side."""
    lhs = weight_squared(p, f, g) * (float(f) - float(g)) ** 2
    return abs(lhs - identity_rhs(p, f, g))


def _power_sum_ratio(x, p):
    x = np.asarray(x, dtype=float)
    return (np.abs(x + 1) ** p - np.abs(x) ** p) / (np.abs(x) ** (p - 1) + 1)


def cp_estimate(p: float, grid_size: int = 200_001) -> float:
    """Numerical value of the constant in ``|a+b|^p <= |a|^p + c(|a|^(p-1)|b| + |b|^p)``.

    Returns ``sup_x (|x+1|^p - |x|^p) / (|x|^(p-1) + 1)`` estimated on the
    compactified axis ``x = tan(pi t / 2)``, refined locally around the
    best grid point, and never below the limiting value p at infinity.
    """
    p = _check_exponent(p)
    t = np.linspace(-1.0, 1.0, grid_size)[1:-1]
    x = np.tan(0.5 * np.pi * t)
    vals = _power_sum_ratio(x, p)
    i = int(np.argmax(vals))
    best = float(vals[i])

    lo, hi = t[max(i - 1, 0)], t[min(i + 1, t.size - 1)]
    res = optimize.minimize_scalar(
        lambda s: -float(_power_sum_ratio(np.tan(0.5 * np.pi * s), p)),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": 1e-14},
    )
    if res.success:
        best = max(best, -float(res.fun))
    # the ratio tends to +p (resp. -p) as x -> +inf (resp. -inf)
    return max(best, p)


def power_bound_holds(p: float, a, b, cp: float, rtol: float = 1e-12):
    """Check ``|a+b|^p <= |a|^p + cp (|a|^(p-1)|b| + |b|^p)`` elementwise."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    lhs = np.abs(a + b) ** p
    rhs = np.abs(a) ** p + cp * (np.abs(a) ** (p - 1) * np.abs(b) + np.abs(b) ** p)
    return lhs <= rhs * (1 + rtol)


def triple_power_bound_check(p: float, a, b, c, cp: float, rtol: float = 1e-12):
    """Check the three-term bound obtained by applying the two-term one twice.

    Works elementwise on arrays; returns a bool (or bool array).
    """
    p = _check_exponent(p)
    a, b, c = (np.asarray(v, dtype=float) for v in (a, b, c))
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b)) and np.all(np.isfinite(c))):
        raise ValueError("non-finite input")
    aa, ab, ac = np.abs(a), np.abs(b), np.abs(c)
    lhs = np.abs(a + b + c) ** p
    rhs = (
        aa**p
        + cp * aa ** (p - 1) * ab
        + cp * aa ** (p - 1) * ac
        + cp * ab**p
        + cp**2 * ab ** (p - 1) * ac
        + cp**2 * ac**p
    )
    out = lhs <= rhs * (1 + rtol)
    return bool(out) if out.ndim == 0 else out
