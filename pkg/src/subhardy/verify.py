"""Inequality verdicts: Hardy chains, auxiliary Hardy, Rellich, sharpness sweeps,
Euler-Lagrange residuals and harmonicity audits.

Gauge-radial test functions are handled by the co-area reduction, where
all three Hardy integrals share the factor ``Q lambda_p`` and quotients are
ratios of one-dimensional integrals. Other test functions are integrated by
Monte Carlo over their support annulus with analytic derivatives.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from . import constants as C
from .frames import DegeneratePointError, apply_L, apply_Lp, random_points
from .quadrature import Estimate, mc_integrate, radial_quad
from .testfns import extremal_profile, make_fundamental, make_power

N_SIGMA = 3.0


@dataclass(frozen=True)
class QuadSettings:
    """Monte-Carlo settings shared by the chain checks."""

    n_samples: int = 100_000
    seed: int = 0
    batch_size: int = 1 << 15
    workers: int | None = None
    radial: bool = True  # use the co-area reduction for gauge-radial u


def _est(value, stderr=0.0, n=0):
    return Estimate(float(value), float(stderr), int(n))


@dataclass
class ChainReport:
    """Outcome of one inequality check.

    ``lhs = constant * (weighted L^p norm of u)``, ``rhs`` the derivative
    side, ``mid`` the projected middle term of the Hardy chain (if any) and
    ``quotient = rhs / (lhs / constant)``.
    """

    kind: str
    lhs: Estimate
    mid: Estimate | None
    rhs: Estimate
    sharp_constant: float
    quotient: float
    quotient_stderr: float
    path: str
    passed: bool
    slack: dict = field(default_factory=dict)

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "lhs": self.lhs.to_dict(),
            "mid": None if self.mid is None else self.mid.to_dict(),
            "rhs": self.rhs.to_dict(),
            "sharp_constant": self.sharp_constant,
            "quotient": self.quotient,
            "quotient_stderr": self.quotient_stderr,
            "path": self.path,
            "verdict": self.verdict,
            "slack": dict(self.slack),
        }


def _check_u(u):
    r_in, r_out = u.support
    if not (r_in > 0 and math.isfinite(r_out)):
        raise ValueError("test function must be supported in a compact annulus away from the origin")
    return r_in, r_out


def _check_params(frame, params):
    if not math.isclose(frame.Q, params.Q):
        raise ValueError(f"params.Q={params.Q} does not match frame Q={frame.Q}")


def _ratio(num: Estimate, den: Estimate, cov_nd: float = 0.0):
    q = num.value / den.value
    var = (num.stderr / den.value) ** 2 + (q * den.stderr / den.value) ** 2 - 2 * q * cov_nd / den.value**2
    return q, math.sqrt(max(var, 0.0))


def _finish(kind, const, den, num, mid, q, sq, path, extra_ok=True, slack=None):
    lhs = _est(const * den.value, const * den.stderr, den.n)
    slack = dict(slack or {})
    slack["quotient_minus_constant_sigma"] = (q - const) / sq if sq > 0 else math.copysign(math.inf, q - const + 1e-300)
    ok = q >= const - N_SIGMA * sq - 1e-12 * max(1.0, abs(const))
    return ChainReport(kind, lhs, mid, num, const, q, sq, path, bool(ok and extra_ok), slack)


def _radial_pieces(u):
    lo, hi = u.support
    pts = []
    if u.radial is not None:
        # transitions of cut-offs and windows: subdivide geometrically
        pts = list(np.geomspace(lo, hi, 9)[1:-1]) if hi / lo > 1.0 else []
    return lo, hi, pts


def _quad1(f, Q, u):
    lo, hi, pts = _radial_pieces(u)
    val, err = radial_quad(f, Q, lo, hi, points=pts)
    return _est(val, err)


def hardy_chain(frame, gauge, params, u, quad: QuadSettings | None = None) -> ChainReport:
    """Three-term weighted Hardy chain.

    ``c int |u|^p d^(-p theta) |D|^p  <=  int |G.D/|D||^p d^(-p(theta-1))
    <=  int |G|^p d^(-p(theta-1))`` with ``D = grad_L d``, ``G = grad_L u``.
    """
    quad = quad or QuadSettings()
    _check_params(frame, params)
    r_in, r_out = _check_u(u)
    p, th, Q = params.p, params.theta, frame.Q
    const = C.hardy_sharp_constant(params)

    if quad.radial and u.radial is not None:
        phi, dphi, _ = u.radial.triple()
        den = _quad1(lambda r: abs(phi(r)) ** p * r ** (-p * th), Q, u)
        num = _quad1(lambda r: abs(dphi(r)) ** p * r ** (-p * (th - 1)), Q, u)
        q = num.value / den.value
        sq = q * math.hypot(num.stderr / num.value if num.value else 0.0, den.stderr / den.value)
        return _finish("hardy", const, den, num, num, q, sq, "radial",
                       slack={"mid_minus_rhs": 0.0})

    def integrand(X):
        uv = u.value(X)
        d, gd, _ = gauge.jet(X)
        sig = frame.sigma(X)
        D = np.einsum("mij,mj->mi", sig, gd)
        G = np.einsum("mij,mj->mi", sig, u.gradient(X))
        nD = np.linalg.norm(D, axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            proj = np.where(nD > 0, np.abs(np.einsum("mi,mi->m", G, D)) / nD, 0.0)
        return np.stack([
            np.abs(uv) ** p * d ** (-p * th) * nD**p,
            proj**p * d ** (-p * (th - 1)),
            np.linalg.norm(G, axis=1) ** p * d ** (-p * (th - 1)),
        ], axis=1)

    res = mc_integrate(frame, gauge, integrand, r_in, r_out, quad.n_samples, quad.seed,
                       batch_size=quad.batch_size, workers=quad.workers)
    den, mid, num = res.estimates
    q, sq = _ratio(num, den, res.cov[2, 0])
    lhs_sd = const * den.stderr
    s1 = math.hypot(lhs_sd, mid.stderr)
    s2 = math.hypot(mid.stderr, num.stderr)
    ordered = (const * den.value <= mid.value + N_SIGMA * s1) and (mid.value <= num.value + N_SIGMA * s2)
    slack = {
        "lhs_to_mid_sigma": (mid.value - const * den.value) / s1 if s1 > 0 else math.inf,
        "mid_to_rhs_sigma": (num.value - mid.value) / s2 if s2 > 0 else math.inf,
    }
    return _finish("hardy", const, den, num, mid, q, sq, "monte_carlo", ordered, slack)


def auxiliary_hardy_check(frame, gauge, params, u, quad: QuadSettings | None = None) -> ChainReport:
    """``int |u|^(p-2) |G|^2 d^-(p theta+2p-2) >= c_aux int |u|^p d^(-p(theta+2)) |D|^2``."""
    quad = quad or QuadSettings()
    _check_params(frame, params)
    r_in, r_out = _check_u(u)
    p, th, Q = params.p, params.theta, frame.Q
    const = C.auxiliary_hardy_constant(params)

    if quad.radial and u.radial is not None:
        phi, dphi, _ = u.radial.triple()
        den = _quad1(lambda r: abs(phi(r)) ** p * r ** (-p * (th + 2)), Q, u)
        num = _quad1(lambda r: abs(phi(r)) ** (p - 2) * dphi(r) ** 2 * r ** (-(p * th + 2 * p - 2)), Q, u)
        q = num.value / den.value
        sq = q * math.hypot(num.stderr / num.value if num.value else 0.0, den.stderr / den.value)
        return _finish("auxiliary_hardy", const, den, num, None, q, sq, "radial")

    def integrand(X):
        uv = np.abs(u.value(X))
        d, gd, _ = gauge.jet(X)
        sig = frame.sigma(X)
        D2 = np.sum(np.einsum("mij,mj->mi", sig, gd) ** 2, axis=1)
        G2 = np.sum(np.einsum("mij,mj->mi", sig, u.gradient(X)) ** 2, axis=1)
        up = uv ** (p - 2) if p != 2 else np.ones_like(uv)
        return np.stack([uv**p * d ** (-p * (th + 2)) * D2, up * G2 * d ** (-(p * th + 2 * p - 2))], axis=1)

    res = mc_integrate(frame, gauge, integrand, r_in, r_out, quad.n_samples, quad.seed,
                       batch_size=quad.batch_size, workers=quad.workers)
    den, num = res.estimates
    q, sq = _ratio(num, den, res.cov[1, 0])
    return _finish("auxiliary_hardy", const, den, num, None, q, sq, "monte_carlo")


def rellich_check(frame, gauge, params, u, quad: QuadSettings | None = None) -> ChainReport:
    """``int |L u|^p d^(-p theta) |D|^(-2(p-1)) >= c_R int |u|^p d^(-p(theta+2)) |D|^2``.

    Admissibility is checked before any integration.
    """
    quad = quad or QuadSettings()
    _check_params(frame, params)
    adm = C.rellich_admissible(params, frame)
    if not adm:
        raise C.InadmissibleParameters(adm.reasons)
    r_in, r_out = _check_u(u)
    p, th, Q = params.p, params.theta, frame.Q
    const = C.rellich_sharp_constant(params, frame)

    if quad.radial and u.radial is not None:
        phi, dphi, d2phi = u.radial.triple()
        den = _quad1(lambda r: abs(phi(r)) ** p * r ** (-p * (th + 2)), Q, u)
        num = _quad1(lambda r: abs(d2phi(r) + (Q - 1) * dphi(r) / r) ** p * r ** (-p * th), Q, u)
        q = num.value / den.value
        sq = q * math.hypot(num.stderr / num.value if num.value else 0.0, den.stderr / den.value)
        return _finish("rellich", const, den, num, None, q, sq, "radial")

    def integrand(X):
        uv = np.abs(u.value(X))
        d, gd, _ = gauge.jet(X)
        D2 = np.sum(np.einsum("mij,mj->mi", frame.sigma(X), gd) ** 2, axis=1)
        Lu = apply_L(frame, u, X)
        with np.errstate(divide="ignore", invalid="ignore"):
            w = np.where(D2 > 0, D2 ** (-(p - 1)), 0.0)
        return np.stack([uv**p * d ** (-p * (th + 2)) * D2, np.abs(Lu) ** p * d ** (-p * th) * w], axis=1)

    res = mc_integrate(frame, gauge, integrand, r_in, r_out, quad.n_samples, quad.seed,
                       batch_size=quad.batch_size, workers=quad.workers)
    den, num = res.estimates
    q, sq = _ratio(num, den, res.cov[1, 0])
    return _finish("rellich", const, den, num, None, q, sq, "monte_carlo")


# ---------------------------------------------------------------------------
# sharpness sweeps


@dataclass
class SweepReport:
    which: str
    eps_grid: list
    quotients: list
    sharp_constant: float
    fitted_constant: float
    fit_model: dict
    relative_error: float
    tolerance: float
    bounded_below: bool
    monotone: bool
    cancellation_residual: float
    passed: bool

    @property
    def L(self) -> list:
        return [-math.log(4 * e * e) for e in self.eps_grid]

    def to_dict(self) -> dict:
        return {
            "which": self.which,
            "eps_grid": list(self.eps_grid),
            "L": self.L,
            "quotients": [q.to_dict() for q in self.quotients],
            "sharp_constant": self.sharp_constant,
            "fitted_constant": self.fitted_constant,
            "fit_model": dict(self.fit_model),
            "relative_error": self.relative_error,
            "tolerance": self.tolerance,
            "bounded_below": self.bounded_below,
            "monotone": self.monotone,
            "cancellation_residual": self.cancellation_residual,
            "verdict": "pass" if self.passed else "fail",
        }

    def csv_rows(self) -> list:
        return [(e, L, q.value, q.stderr) for e, L, q in zip(self.eps_grid, self.L, self.quotients)]


def fit_sweep(L, R) -> dict:
    """Fit ``R = (c L + a) / (L + b)``: linear least squares on
    ``R L = c L + a - b R``, then a nonlinear refinement."""
    L = np.asarray(L, dtype=float)
    R = np.asarray(R, dtype=float)
    if L.size < 4:
        raise ValueError("sweep fit needs at least 4 grid points")
    A = np.column_stack([L, np.ones_like(L), -R])
    x0, *_ = np.linalg.lstsq(A, R * L, rcond=None)

    def resid(x):
        return ((x[0] * L + x[1]) / (L + x[2]) - R) / np.maximum(np.abs(R), 1e-300)

    sol = optimize.least_squares(resid, x0, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15)
    x = sol.x if sol.success and np.all(np.isfinite(sol.x)) else x0
    if not np.all(np.isfinite(x)):
        raise RuntimeError("sweep fit failed")
    return {"c": float(x[0]), "a": float(x[1]), "b": float(x[2]),
            "max_abs_residual": float(np.max(np.abs(resid(x) * R)))}


def _sweep_integrands(which, params):
    p, th, Q = params.p, params.theta, params.Q
    a_h, a_r = C.extremal_exponents(params)
    if which == "hardy":
        return a_h, (lambda f0, f1, f2, r: abs(f1) ** p * r ** (-p * (th - 1)),
                     lambda f0, f1, f2, r: abs(f0) ** p * r ** (-p * th))
    if which == "rellich":
        return a_r, (lambda f0, f1, f2, r: abs(f2 + (Q - 1) * f1 / r) ** p * r ** (-p * th),
                     lambda f0, f1, f2, r: abs(f0) ** p * r ** (-p * (th + 2)))
    if which == "auxiliary":
        return a_r, (lambda f0, f1, f2, r: abs(f0) ** (p - 2) * f1**2 * r ** (-(p * th + 2 * p - 2)),
                     lambda f0, f1, f2, r: abs(f0) ** p * r ** (-p * (th + 2)))
    raise ValueError(f"unknown inequality {which!r}")


def sweep_quotient(which, params, eps, lam: float = 1.0) -> Estimate:
    """Radial Rayleigh quotient of the extremal ``d^a g_eps(d)``.

    ``lam`` scales both integrals by the co-area factor ``Q lambda``; it
    cancels exactly.
    """
    a, (fnum, fden) = _sweep_integrands(which, params)
    phi, dphi, d2phi = extremal_profile(a, eps)
    Q = params.Q

    def wrap(f):
        return lambda r: f(float(phi(r)), float(dphi(r)), float(d2phi(r)), r)

    pts = (2 * eps, 0.5 / eps)
    n, en = radial_quad(wrap(fnum), Q, eps, 1 / eps, pts)
    d, ed = radial_quad(wrap(fden), Q, eps, 1 / eps, pts)
    n, en, d, ed = (Q * lam * v for v in (n, en, d, ed))
    q = n / d
    return Estimate(q, abs(q) * math.hypot(en / n if n else 0.0, ed / d), 0)


def sharpness_sweep(frame, gauge, params, which: str = "hardy", eps_grid=(1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 1e-4),
                    quad: QuadSettings | None = None, tolerance: float | None = None) -> SweepReport:
    """Rayleigh quotients of the extremal sequence over ``eps_grid`` and the fitted limit."""
    _check_params(frame, params)
    eps_grid = [float(e) for e in eps_grid]
    if len(eps_grid) < 4:
        raise ValueError("sweep fit needs at least 4 grid points")
    if any(not (0 < e < 0.5) for e in eps_grid) or any(b >= a for a, b in zip(eps_grid, eps_grid[1:])):
        raise ValueError("eps_grid must be strictly decreasing in (0, 1/2)")
    if which == "hardy":
        const = C.hardy_sharp_constant(params)
    elif which == "rellich":
        const = C.rellich_sharp_constant(params, frame)
    elif which == "auxiliary":
        const = C.auxiliary_hardy_constant(params)
    else:
        raise ValueError(f"unknown inequality {which!r}")
    if tolerance is None:
        tolerance = 0.01 if frame.kind == "euclidean" else 0.02

    quotients = [sweep_quotient(which, params, e) for e in eps_grid]
    alt = sweep_quotient(which, params, eps_grid[-1], lam=math.pi)
    cancel = abs(alt.value - quotients[-1].value) / abs(quotients[-1].value)

    L = [-math.log(4 * e * e) for e in eps_grid]
    R = [q.value for q in quotients]
    model = fit_sweep(L, R)
    c = model["c"]
    rel = abs(c - const) / abs(const) if const else abs(c)
    below = all(q.value >= const - N_SIGMA * q.stderr - 1e-12 * max(1.0, const) for q in quotients)
    monotone = all(b <= a + N_SIGMA * (qa.stderr + qb.stderr) + 1e-12 * abs(a)
                   for a, b, qa, qb in zip(R, R[1:], quotients, quotients[1:]))
    passed = rel <= tolerance and below and cancel <= 1e-12
    return SweepReport(which, eps_grid, quotients, const, c, model, rel, tolerance, below, monotone, cancel, passed)


# ---------------------------------------------------------------------------
# maximizers and harmonicity


def unit_sphere_points(frame, gauge, n_points: int, seed: int, min_grad: float = 0.1):
    """Random points on ``{d = 1}`` with ``|grad_L d| >= min_grad``."""
    X = random_points(frame, gauge, 4 * n_points + 64, seed, r_range=(0.25, 4.0))
    d = gauge.value(X)
    Y = frame.dilate(X, 1.0 / d)
    Y = Y[gauge.horizontal_norm(Y) >= min_grad]
    if Y.shape[0] < n_points:
        return unit_sphere_points(frame, gauge, n_points, seed + 1, min_grad)[:n_points] if Y.shape[0] == 0 \
            else np.concatenate([Y, unit_sphere_points(frame, gauge, n_points - Y.shape[0], seed + 1, min_grad)])
    return Y[:n_points]


def euler_lagrange_residual(frame, gauge, params, which: str, x, shift: float = 0.0):
    """Pointwise residual of the first-order (Hardy) or second-order (Rellich)
    equation satisfied by ``u = d^a`` with ``a`` the extremal exponent (plus ``shift``).
    """
    _check_params(frame, params)
    X = np.atleast_2d(np.asarray(x, dtype=float))
    if np.any(gauge.degenerate(X, 1e-8)):
        raise DegeneratePointError("Euler-Lagrange residual requested on the singular locus")
    p, th, Q = params.p, params.theta, frame.Q
    a_h, a_r = C.extremal_exponents(params)
    d, gd, _ = gauge.jet(X)
    sig = frame.sigma(X)
    D = np.einsum("mij,mj->mi", sig, gd)
    nD = np.linalg.norm(D, axis=1)
    if which == "hardy":
        u = make_power(gauge, a_h + shift)
        G = np.einsum("mij,mj->mi", sig, u.gradient(X))
        alpha = (p * (th - 1) + params.beta_hardy * (p - 1)) / p
        res = np.einsum("mi,mi->m", G, D) / (nD * d ** (th - 1)) - alpha * u.value(X) * nD / d**th
    elif which == "rellich":
        u = make_power(gauge, a_r + shift)
        cst = C.rellich_product(params)
        Lu = apply_L(frame, u, X)
        res = Lu * d ** (-th) * nD ** (-2 * (p - 1) / p) + cst * u.value(X) * d ** (-th - 2) * nD ** (2 / p)
    else:
        raise ValueError(f"unknown inequality {which!r}")
    res = np.abs(res)
    return res[0] if np.ndim(x) == 1 else res


@dataclass
class HarmonicityReport:
    frame: dict
    n_points: int
    seed: int
    per_p: dict
    passed: bool

    def to_dict(self) -> dict:
        return {"frame": self.frame, "n_points": self.n_points, "seed": self.seed,
                "per_p": self.per_p, "verdict": "pass" if self.passed else "fail"}


def harmonicity_audit(frame, gauge, p_list=(2, 3, 4), n_points: int = 1000, seed: int = 0,
                      harmonic_tol: float = 1e-5, identity_tol: float = 1e-6) -> HarmonicityReport:
    """Check ``L_p Gamma_p = 0`` and ``L_p d = (Q-1)|D|^p/d`` at random points.

    Also checks the implication: when ``L_p(d^beta)`` vanishes for
    ``beta = (p-Q)/(p-1)`` (or ``L_p(-ln d)`` when p = Q), then
    ``L_p d = (1-beta)(p-1)|D|^p/d``.
    """
    Q = frame.Q
    out = {}
    ok = True
    for i, p in enumerate(p_list):
        p = float(p)
        X = random_points(frame, gauge, n_points, seed + 7919 * i, r_range=(0.5, 2.0))
        d = gauge.value(X)
        Dp = gauge.horizontal_norm(X) ** p
        gam = np.abs(apply_Lp(frame, gauge, p, make_fundamental(gauge, p), X))
        Ld = apply_Lp(frame, gauge, p, make_power(gauge, 1.0), X)
        ident = np.abs(Ld - (Q - 1) * Dp / d) / (1 + np.abs(Ld))
        beta = 0.0 if math.isclose(p, Q) else (p - Q) / (p - 1)
        power = np.abs(Ld - (1 - beta) * (p - 1) * Dp / d) / (1 + np.abs(Ld))
        g_max, i_max, l_max = float(gam.max()), float(ident.max()), float(power.max())
        implication_ok = (g_max > harmonic_tol) or (l_max <= identity_tol)
        p_ok = g_max <= harmonic_tol and i_max <= identity_tol and implication_ok
        ok &= p_ok
        out[f"{p:g}"] = {
            "max_abs_Lp_Gamma": g_max,
            "max_rel_gauge_identity": i_max,
            "harmonic_beta": beta,
            "max_rel_power_identity": l_max,
            "power_implication_holds": bool(implication_ok),
            "pass": bool(p_ok),
        }
    return HarmonicityReport(frame.to_dict(), int(n_points), int(seed), out, bool(ok))


def sharp_constants_quiet(params, frame=None):
    """Constants without emitting critical-weight warnings (flags are kept in the result)."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", C.CriticalWeightWarning)
        return C.sharp_constants(params, frame)
