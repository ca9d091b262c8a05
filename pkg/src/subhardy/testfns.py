"""Smooth cut-offs, extremal sequences and random compactly supported test functions.

The cut-off ``g_eps`` vanishes outside ``[eps, 1/eps]``, equals one on
``[2 eps, 1/(2 eps)]`` and uses the exponential smooth step

    s(t) = e(t) / (e(t) + e(1 - t)),   e(t) = exp(-k/t),   k = 1/2,

on both transitions. The rate ``k = 1/2`` (slope one at the midpoint) keeps
the transition energy ``int (1+t) s'(t)^2 dt`` near its minimum over the
family, so extremal quotients approach their limits quickly. Every test function carries analytic first and
second derivatives so operators can be applied without finite differences.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np
from scipy import integrate, optimize
from scipy.special import expit

from .frames import Gauge

# ---------------------------------------------------------------------------
# smooth step


STEP_RATE = 0.5


def _step_parts(t):
    t = np.asarray(t, dtype=float)
    inside = (t > 0) & (t < 1)
    ti = np.where(inside, t, 0.5)
    q = STEP_RATE * (1.0 / ti - 1.0 / (1.0 - ti))
    s = expit(-q)
    w = s * (1.0 - s)
    k = STEP_RATE * (1.0 / ti**2 + 1.0 / (1.0 - ti) ** 2)
    dk = STEP_RATE * (-2.0 / ti**3 + 2.0 / (1.0 - ti) ** 3)
    pos = inside & (w > 0)
    s1 = np.where(pos, w * k, 0.0)
    s2 = np.where(pos, s1 * (1.0 - 2.0 * s) * k + w * dk, 0.0)
    s0 = np.where(inside, s, np.where(t >= 1, 1.0, 0.0))
    return s0, s1, s2


def smooth_step(t, derivative: int = 0):
    """Smooth step ``s`` (0 for t <= 0, 1 for t >= 1) or its first/second derivative."""
    if derivative not in (0, 1, 2):
        raise ValueError("derivative must be 0, 1 or 2")
    return _step_parts(t)[derivative]


@functools.lru_cache(maxsize=None)
def step_derivative_maxima() -> tuple[float, float]:
    """``(max |s'|, max |s''|)`` from a dense grid refined by bounded scalar search."""
    t = np.linspace(0.0, 1.0, 200_001)[1:-1]
    out = []
    for order in (1, 2):
        vals = np.abs(smooth_step(t, order))
        i = int(np.argmax(vals))
        lo, hi = t[max(i - 1, 0)], t[min(i + 1, t.size - 1)]
        res = optimize.minimize_scalar(
            lambda x: -float(np.abs(smooth_step(x, order))), bounds=(lo, hi), method="bounded",
            options={"xatol": 1e-13},
        )
        out.append(max(float(vals[i]), -float(res.fun)))
    return out[0], out[1]


@functools.lru_cache(maxsize=None)
def cutoff_constant() -> float:
    """Universal ``c`` in the cut-off derivative bounds.

    Rising part: ``|g'| = |s'|/eps``, ``|g''| = |s''|/eps^2``; falling part:
    ``|g'| = 2 eps |s'|``, ``|g''| = 4 eps^2 |s''|``.
    """
    m1, m2 = step_derivative_maxima()
    return max(2.0 * m1, 4.0 * m2)


def plateau(r, a: float, b: float, c: float, e: float):
    """Value, first and second derivative of the plateau bump.

    Rises smoothly on ``[a, b]``, equals 1 on ``[b, c]`` and falls on ``[c, e]``.
    """
    r = np.asarray(r, dtype=float)
    up = (r - a) / (b - a)
    down = (e - r) / (e - c)
    u0, u1, u2 = _step_parts(up)
    d0, d1, d2 = _step_parts(down)
    rising = r < b
    falling = r > c
    val = np.where(rising, u0, np.where(falling, d0, 1.0))
    der = np.where(rising, u1 / (b - a), np.where(falling, -d1 / (e - c), 0.0))
    der2 = np.where(rising, u2 / (b - a) ** 2, np.where(falling, d2 / (e - c) ** 2, 0.0))
    return val, der, der2


@dataclass(frozen=True)
class CutoffFamily:
    """The cut-off ``g_eps`` and its derivatives."""

    eps: float

    def __post_init__(self):
        if not (0 < self.eps < 0.5):
            raise ValueError(f"eps must lie in (0, 1/2), got {self.eps}")

    @property
    def c(self) -> float:
        return cutoff_constant()

    @property
    def support(self) -> tuple[float, float]:
        return self.eps, 1.0 / self.eps

    def jet(self, r):
        e = self.eps
        return plateau(r, e, 2 * e, 0.5 / e, 1.0 / e)

    def value(self, r):
        return self.jet(r)[0]

    def d1(self, r):
        return self.jet(r)[1]

    def d2(self, r):
        return self.jet(r)[2]

    __call__ = value


def make_cutoff(eps: float) -> CutoffFamily:
    """Cut-off ``g_eps`` for ``0 < eps < 1/2``."""
    return CutoffFamily(float(eps))


class CutoffMoments(NamedTuple):
    log_mass: float       # int r^-1 g^p
    grad_mass: float      # int g^(p-1) |g'|
    grad_p: float         # int r^(p-1) |g'|^p
    hess_mass: float      # int r g^(p-1) |g''|
    mixed: float          # int r^p |g'|^(p-1) |g''|
    hess_p: float         # int r^(2p-1) |g''|^p


def cutoff_moments(eps: float, p: float) -> CutoffMoments:
    """The six cut-off integrals over ``(0, inf)``.

    The plateau contributes ``-ln(4 eps^2)`` to the first integral and nothing
    to the others; each transition is integrated in its own unit variable.
    """
    g = make_cutoff(eps)
    p = float(p)
    if p < 2:
        raise ValueError("p must be >= 2")

    def integrands(r):
        v, d1, d2 = g.jet(r)
        v, d1, d2 = abs(float(v)), abs(float(d1)), abs(float(d2))
        return (
            v**p / r,
            v ** (p - 1) * d1,
            r ** (p - 1) * d1**p,
            r * v ** (p - 1) * d2,
            r**p * d1 ** (p - 1) * d2,
            r ** (2 * p - 1) * d2**p,
        )

    e = g.eps
    # rising: r = e (1 + t); falling: r = 1/e - t/(2e)
    pieces = [(lambda t: e * (1 + t), e), (lambda t: 1.0 / e - t / (2 * e), 1.0 / (2 * e))]
    totals = np.zeros(6)
    for rmap, jac in pieces:
        for j in range(6):
            val, _ = integrate.quad(lambda t: integrands(rmap(t))[j] * jac, 0.0, 1.0,
                                    epsabs=0.0, epsrel=1e-12, limit=200)
            totals[j] += val
    totals[0] += -math.log(4 * e * e)
    return CutoffMoments(*map(float, totals))


# ---------------------------------------------------------------------------
# test functions


@dataclass(frozen=True)
class RadialProfile:
    """1-D profile ``phi`` with derivatives, composed with a gauge."""

    phi: Callable
    dphi: Callable
    d2phi: Callable
    gauge: Gauge

    def triple(self):
        return self.phi, self.dphi, self.d2phi


@dataclass(frozen=True)
class TestFunction:
    """Scalar function on R^N with optional analytic gradient and Hessian."""

    value: Callable
    gradient: Optional[Callable] = None
    hessian: Optional[Callable] = None
    radial: Optional[RadialProfile] = None
    support: tuple = (0.0, math.inf)

    __test__ = False  # not a pytest class

    def __call__(self, x):
        return self.value(x)


def _batch(x):
    x = np.asarray(x, dtype=float)
    return np.atleast_2d(x), x.ndim == 1


def radial_function(gauge: Gauge, phi, dphi, d2phi, support=(0.0, math.inf)) -> TestFunction:
    """``u = phi(d)`` with chain-rule derivatives."""

    def value(x):
        X, single = _batch(x)
        out = phi(gauge.value(X))
        return out[0] if single else out

    def gradient(x):
        X, single = _batch(x)
        d, gd, _ = gauge.jet(X)
        out = dphi(d)[:, None] * gd
        return out[0] if single else out

    def hessian(x):
        X, single = _batch(x)
        d, gd, hd = gauge.jet(X)
        out = d2phi(d)[:, None, None] * np.einsum("mi,mj->mij", gd, gd) + dphi(d)[:, None, None] * hd
        return out[0] if single else out

    return TestFunction(value, gradient, hessian, RadialProfile(phi, dphi, d2phi, gauge), tuple(support))


def power_profile(a: float):
    """``(r^a, a r^(a-1), a(a-1) r^(a-2))``."""
    a = float(a)
    return (lambda r: np.asarray(r, float) ** a,
            lambda r: a * np.asarray(r, float) ** (a - 1),
            lambda r: a * (a - 1) * np.asarray(r, float) ** (a - 2))


def log_profile():
    """``(-ln r, -1/r, 1/r^2)``."""
    return (lambda r: -np.log(r), lambda r: -1.0 / np.asarray(r, float), lambda r: 1.0 / np.asarray(r, float) ** 2)


def make_power(gauge: Gauge, a: float) -> TestFunction:
    """``d^a`` (not compactly supported; for pointwise identities)."""
    return radial_function(gauge, *power_profile(a))


def make_fundamental(gauge: Gauge, p: float) -> TestFunction:
    """``Gamma_p = d^((p-Q)/(p-1))`` for p != Q and ``-ln d`` for p = Q."""
    Q = gauge.gauge_exponent
    if math.isclose(p, Q):
        return radial_function(gauge, *log_profile())
    return make_power(gauge, (p - Q) / (p - 1))


def extremal_profile(a: float, eps: float):
    """Profile ``r^a g_eps(r)`` with its first two derivatives (zero off the support)."""
    g = make_cutoff(eps)
    lo, hi = g.support
    a = float(a)

    def parts(r):
        r = np.asarray(r, dtype=float)
        inside = (r > lo) & (r < hi)
        ri = np.where(inside, r, 1.0)
        v, d1, d2 = g.jet(ri)
        ra = ri**a
        f0 = ra * v
        f1 = a * ra / ri * v + ra * d1
        f2 = a * (a - 1) * ra / ri**2 * v + 2 * a * ra / ri * d1 + ra * d2
        return [np.where(inside, f, 0.0) for f in (f0, f1, f2)]

    return (lambda r: parts(r)[0], lambda r: parts(r)[1], lambda r: parts(r)[2])


def make_extremal(gauge: Gauge, a: float, eps: float) -> TestFunction:
    """``u_eps = d^a g_eps(d)``, gauge-radial with support ``(eps, 1/eps)``."""
    return radial_function(gauge, *extremal_profile(a, eps), support=(eps, 1.0 / eps))


def make_random_bump(gauge: Gauge, seed: int, annulus=(0.5, 2.0)) -> TestFunction:
    """Random smooth function supported in the gauge annulus ``r_in <= d <= r_out``.

    A plateau window in the gauge radius (transitions a quarter of the
    annulus wide) times a random quadratic polynomial and a Gaussian.
    Deterministic in ``seed``.
    """
    r_in, r_out = map(float, annulus)
    if not (0 < r_in < r_out):
        raise ValueError("annulus must satisfy 0 < r_in < r_out")
    N = gauge.frame.N
    rng = np.random.default_rng(seed)
    c0 = 1.0 + rng.uniform(0.0, 1.0)
    b = rng.normal(size=N) / r_out
    M = rng.normal(size=(N, N)) / (2 * r_out**2)
    M = 0.5 * (M + M.T)
    mu = rng.uniform(-0.5, 0.5, size=N) * gauge.bounding_half_widths(r_out)
    s = r_out * rng.uniform(0.8, 1.5)
    delta = 0.25 * (r_out - r_in)
    window = (r_in, r_in + delta, r_out - delta, r_out)

    def jet(X):
        d, gd, hd = gauge.jet(X)
        w0, w1, w2 = plateau(d, *window)
        W = w0
        gW = w1[:, None] * gd
        hW = w2[:, None, None] * np.einsum("mi,mj->mij", gd, gd) + w1[:, None, None] * hd
        P = c0 + X @ b + np.einsum("mi,ij,mj->m", X, M, X)
        gP = b[None] + 2 * X @ M
        hP = np.broadcast_to(2 * M, (X.shape[0], N, N))
        y = X - mu
        G = np.exp(-np.sum(y * y, axis=1) / (2 * s * s))
        gG = -G[:, None] * y / s**2
        hG = G[:, None, None] * (np.einsum("mi,mj->mij", y, y) / s**4 - np.eye(N)[None] / s**2)
        # product rule for P * G, then for (P G) * W
        v1, g1, h1 = _product(P, gP, hP, G, gG, hG)
        return _product(v1, g1, h1, W, gW, hW)

    def value(x):
        X, single = _batch(x)
        v = jet(X)[0]
        return v[0] if single else v

    def gradient(x):
        X, single = _batch(x)
        g = jet(X)[1]
        return g[0] if single else g

    def hessian(x):
        X, single = _batch(x)
        h = jet(X)[2]
        return h[0] if single else h

    return TestFunction(value, gradient, hessian, None, (r_in, r_out))


def _product(v1, g1, h1, v2, g2, h2):
    v = v1 * v2
    g = v1[:, None] * g2 + v2[:, None] * g1
    gg = np.einsum("mi,mj->mij", g1, g2)
    h = v1[:, None, None] * h2 + v2[:, None, None] * h1 + gg + np.swapaxes(gg, 1, 2)
    return v, g, h
