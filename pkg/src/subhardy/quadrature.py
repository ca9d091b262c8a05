"""Monte-Carlo integration over gauge annuli and co-area radial reduction.

Monte-Carlo estimates draw uniform points in an axis-aligned box containing
the gauge ball ``{d <= r_out}`` and keep those with ``d >= r_in``. Each batch
has its own counter-based random stream keyed by ``(seed, shell, batch)``
and contributes sums and cross-products; the batches are reduced in a fixed
order, so results depend only on ``(seed, n, batch_size)`` and not on the
number of worker threads.

For gauge-radial integrands the co-area formula gives

    int f(d) |grad_L d|^p dx = Q lambda_p int f(r) r^(Q-1) dr,

with ``lambda_p = int_{d <= 1} |grad_L d|^p dx``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

DEFAULT_BATCH = 1 << 15
MIN_ACCEPTANCE = 1e-4
STRATIFY_RATIO = 100.0


class QuadratureError(RuntimeError):
    """A quadrature rule failed (low acceptance, non-convergence, divergence)."""


@dataclass(frozen=True)
class Estimate:
    """Value with a standard error and the number of samples behind it."""

    value: float
    stderr: float
    n: int

    @property
    def n_samples(self) -> int:
        return self.n

    def to_dict(self) -> dict:
        return {"value": float(self.value), "stderr": float(self.stderr), "n": int(self.n)}

    def __float__(self) -> float:
        return float(self.value)


@dataclass(frozen=True)
class MCResult:
    """Joint estimate of several integrals sharing the same samples."""

    values: np.ndarray
    cov: np.ndarray
    n: int
    accepted: int

    def estimate(self, i: int = 0) -> Estimate:
        return Estimate(float(self.values[i]), float(math.sqrt(max(self.cov[i, i], 0.0))), self.n)

    @property
    def estimates(self) -> list:
        return [self.estimate(i) for i in range(self.values.size)]


def batch_generator(seed: int, shell: int, batch: int) -> np.random.Generator:
    """Philox stream for one batch; independent of scheduling."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(shell), int(batch)))
    return np.random.Generator(np.random.Philox(ss))


def _shells(r_in: float, r_out: float, Q: float):
    # split when the radius ratio or the volume ratio of the two gauge balls is large:
    # in high homogeneous dimension the inner part of even a modest annulus
    # receives almost no samples from the outer bounding box
    if r_in > 0 and (r_out / r_in > STRATIFY_RATIO or (r_out / r_in) ** Q > STRATIFY_RATIO):
        k = int(math.ceil(math.log2(r_out / r_in)))
        edges = r_in * (r_out / r_in) ** (np.arange(k + 1) / k)
        edges[0], edges[-1] = r_in, r_out
        return list(zip(edges[:-1], edges[1:]))
    return [(r_in, r_out)]


def _batch_sums(gauge, integrand, lo, hi, half, size, seed, shell, batch):
    rng = batch_generator(seed, shell, batch)
    X = rng.uniform(-1.0, 1.0, size=(size, half.size)) * half
    d = gauge.value(X)
    keep = (d <= hi) & (d >= lo)
    Xa = X[keep]
    if Xa.shape[0]:
        vals = np.asarray(integrand(Xa), dtype=float)
        vals = vals.reshape(Xa.shape[0], -1)
    else:
        vals = np.zeros((0, 1))
    s1 = vals.sum(axis=0)
    s2 = vals.T @ vals
    return s1, s2, int(keep.sum())


def mc_integrate(frame, gauge, integrand: Callable, r_in: float, r_out: float, n: int, seed: int,
                 batch_size: int = DEFAULT_BATCH, workers: int | None = None) -> MCResult:
    """Joint MC estimate of ``int_{r_in <= d <= r_out} F(x) dx`` for vector-valued ``F``.

    ``integrand`` maps an ``(m, N)`` batch to ``(m,)`` or ``(m, k)``. When
    ``r_out / r_in`` or ``(r_out / r_in)^Q`` exceeds 100 the annulus is split
    into geometric shells of ratio at most 2, each sampled from its own
    bounding box with an equal share of ``n``.
    """
    r_in, r_out = float(r_in), float(r_out)
    if not (0 <= r_in < r_out):
        raise ValueError("need 0 <= r_in < r_out")
    n = int(n)
    if n < 2:
        raise ValueError("need at least two samples")
    shells = _shells(r_in, r_out, float(frame.Q))
    per_shell = [n // len(shells) + (1 if i < n % len(shells) else 0) for i in range(len(shells))]

    tasks = []
    for s, ((lo, hi), ns) in enumerate(zip(shells, per_shell)):
        half = gauge.bounding_half_widths(hi)
        for b, start in enumerate(range(0, ns, batch_size)):
            tasks.append((s, lo, hi, half, min(batch_size, ns - start), b))

    def run(t):
        s, lo, hi, half, size, b = t
        return _batch_sums(gauge, integrand, lo, hi, half, size, seed, s, b)

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, tasks))
    else:
        results = [run(t) for t in tasks]

    values = None
    cov = None
    accepted = 0
    for s, ((lo, hi), ns) in enumerate(zip(shells, per_shell)):
        vol = float(np.prod(2 * gauge.bounding_half_widths(hi)))
        mine = [r for t, r in zip(tasks, results) if t[0] == s]
        k = max(r[0].size for r in mine)
        s1 = np.zeros(k)
        s2 = np.zeros((k, k))
        acc = 0
        for r1, r2, a in mine:  # fixed batch order
            if r1.size == k:
                s1 += r1
                s2 += r2
            acc += a
        if acc / ns < MIN_ACCEPTANCE:
            raise QuadratureError(f"acceptance rate {acc / ns:.2e} below {MIN_ACCEPTANCE:g}")
        mean = s1 / ns
        c = (s2 / ns - np.outer(mean, mean)) * ns / (ns - 1)
        v_shell = vol * mean
        c_shell = vol**2 * c / ns
        values = v_shell if values is None else values + v_shell
        cov = c_shell if cov is None else cov + c_shell
        accepted += acc
    return MCResult(values, cov, n, accepted)


def mc_gauge_annulus(frame, gauge, integrand: Callable, r_in: float, r_out: float, n: int, seed: int,
                     **kwargs) -> Estimate:
    """Scalar MC estimate of ``int_{r_in <= d <= r_out} f(x) dx``."""
    return mc_integrate(frame, gauge, integrand, r_in, r_out, n, seed, **kwargs).estimate(0)


@dataclass(frozen=True)
class SphereConstant:
    """``lambda_p = int_{d <= 1} |grad_L d|^p dx`` and the derived surface law."""

    p: float
    lambda_p: Estimate
    Q: float

    def volume(self, r):
        """``int_{d <= r} |grad_L d|^p dx = lambda_p r^Q``."""
        return self.lambda_p.value * np.asarray(r, dtype=float) ** self.Q

    def surface(self, r):
        """``Q lambda_p r^(Q-1)``, the co-area density at gauge radius ``r``."""
        return self.Q * self.lambda_p.value * np.asarray(r, dtype=float) ** (self.Q - 1)

    def to_dict(self) -> dict:
        return {"p": self.p, "Q": self.Q, "lambda_p": self.lambda_p.to_dict()}


def sphere_constant(frame, gauge, p: float, n: int, seed: int, **kwargs) -> SphereConstant:
    """Estimate ``lambda_p`` by MC over the unit gauge ball."""
    p = float(p)
    if p < 2:
        raise ValueError("p must be >= 2")
    est = mc_gauge_annulus(frame, gauge, lambda X: gauge.horizontal_norm(X) ** p, 0.0, 1.0, n, seed, **kwargs)
    return SphereConstant(p, est, float(frame.Q))


def radial_quad(f: Callable, Q: float, r_in: float, r_out: float, points=(), epsrel: float = 1e-12):
    """``int_{r_in}^{r_out} f(r) r^(Q-1) dr`` and its error estimate.

    Pieces between consecutive ``points`` are integrated separately; pieces
    away from zero use the variable ``s = ln r``. Raises
    :class:`QuadratureError` when the adaptive rule does not converge.
    """
    r_in, r_out = float(r_in), float(r_out)
    if not (0 <= r_in < r_out) or not math.isfinite(r_out):
        raise ValueError("need 0 <= r_in < r_out < inf")
    edges = sorted({r_in, r_out, *[float(x) for x in points if r_in < x < r_out]})
    total = 0.0
    err = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        if a > 0:
            def g(s):
                r = math.exp(s)
                return float(f(r)) * r**Q
            lo, hi = math.log(a), math.log(b)
        else:
            def g(r):
                return float(f(r)) * r ** (Q - 1) if r > 0 else 0.0
            lo, hi = a, b
        try:
            out = integrate.quad(g, lo, hi, epsabs=0.0, epsrel=epsrel, limit=500, full_output=1)
        except (OverflowError, ZeroDivisionError) as exc:
            raise QuadratureError(f"radial quadrature diverged on [{a:g}, {b:g}]") from exc
        val, e = out[0], out[1]
        if len(out) > 3 and not (math.isfinite(val) and e <= max(1e-8 * abs(val), 1e-300)):
            raise QuadratureError(f"radial quadrature failed on [{a:g}, {b:g}]: {out[3]}")
        if not math.isfinite(val):
            raise QuadratureError(f"radial quadrature diverged on [{a:g}, {b:g}]")
        total += val
        err += e
    return total, err


def radial_integral(gauge_const: SphereConstant, f: Callable, r_in: float, r_out: float, points=()) -> Estimate:
    """``Q lambda_p int f(r) r^(Q-1) dr``; stderr inherited from ``lambda_p``."""
    val, _ = radial_quad(f, gauge_const.Q, r_in, r_out, points)
    lam = gauge_const.lambda_p
    scale = gauge_const.Q * val
    return Estimate(scale * lam.value, abs(scale) * lam.stderr, lam.n)
