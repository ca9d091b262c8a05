"""Vector-field frames, homogeneous gauges and the operators they induce.

A frame is a family ``X_i = sum_j sigma_ij(x) d/dx_j`` (i = 1..h) on R^N.
With ``A = sigma^T sigma`` the frame defines

* the horizontal gradient ``grad_L u = sigma grad u``,
* the sub-Laplacian ``L u = div(A grad u)``,
* the p-sub-Laplacian ``L_p u = div(|grad_L u|^(p-2) A grad u)``.

Four geometries are built in: Euclidean, Heisenberg, Heisenberg-Greiner
and Baouendi-Grushin, each paired with its homogeneous gauge. All array
functions take points as ``(m, N)`` batches (a single ``(N,)`` point is
accepted too) and never mutate their inputs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

EPS = np.finfo(float).eps
KINDS = ("euclidean", "heisenberg", "heisenberg_greiner", "baouendi_grushin")
_ALIASES = {
    "euclid": "euclidean",
    "h": "heisenberg",
    "greiner": "heisenberg_greiner",
    "grushin": "baouendi_grushin",
}


class DegeneratePointError(ValueError):
    """Evaluation requested on a singular locus of the frame or gauge."""


def _as_batch(x):
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    return np.atleast_2d(x), single


def _unbatch(y, single):
    return y[0] if single else y


def _norm_power(w, q):
    """Return ``|w|^q`` together with its gradient and Hessian (row-batched)."""
    m, d = w.shape
    r = np.linalg.norm(w, axis=1)
    val = r**q
    grad = q * (r ** (q - 2))[:, None] * w
    hess = q * (r ** (q - 2))[:, None, None] * np.eye(d)[None]
    if q != 2:
        hess = hess + q * (q - 2) * (r ** (q - 4))[:, None, None] * np.einsum("mi,mj->mij", w, w)
    return val, grad, hess


@dataclass(frozen=True)
class Frame:
    """Immutable description of one of the built-in frames."""

    kind: str
    n: int
    k: int = 0
    gamma: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown frame kind {self.kind!r}")
        if self.n < 1:
            raise ValueError("dimension n must be >= 1")
        if self.kind == "heisenberg_greiner" and self.gamma < 1:
            raise ValueError("Heisenberg-Greiner requires gamma >= 1")
        if self.kind == "baouendi_grushin":
            if self.gamma < 0:
                raise ValueError("Baouendi-Grushin requires gamma >= 0")
            if self.k < 1:
                raise ValueError("Baouendi-Grushin requires k >= 1")

    # -- dimensions ---------------------------------------------------------

    @property
    def N(self) -> int:
        if self.kind == "euclidean":
            return self.n
        if self.kind == "baouendi_grushin":
            return self.n + self.k
        return 2 * self.n + 1

    @property
    def h(self) -> int:
        if self.kind in ("heisenberg", "heisenberg_greiner"):
            return 2 * self.n
        return self.N

    @property
    def dilation_exponents(self) -> np.ndarray:
        if self.kind == "euclidean":
            return np.ones(self.n)
        if self.kind == "baouendi_grushin":
            return np.concatenate([np.ones(self.n), np.full(self.k, 1.0 + self.gamma)])
        return np.concatenate([np.ones(2 * self.n), [2.0 * self._g]])

    @property
    def Q(self) -> float:
        return float(self.dilation_exponents.sum())

    @property
    def _g(self) -> float:
        # Heisenberg is the gamma = 1 member of the Greiner family
        return 1.0 if self.kind == "heisenberg" else float(self.gamma)

    def dilate(self, x, lam):
        """Apply the anisotropic dilation ``delta_lam``."""
        return np.asarray(x, dtype=float) * np.asarray(lam, dtype=float)[..., None] ** self.dilation_exponents \
            if np.ndim(lam) else np.asarray(x, dtype=float) * float(lam) ** self.dilation_exponents

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "n": self.n}
        if self.kind == "baouendi_grushin":
            d["k"] = self.k
        if self.kind in ("heisenberg_greiner", "baouendi_grushin"):
            d["gamma"] = self.gamma
        return d

    # -- coefficient matrix and derivatives --------------------------------

    def sigma(self, x):
        """Coefficient matrix, shape ``(m, h, N)``."""
        return self._sigma_and_derivative(x, derivative=False)[0]

    def dsigma(self, x):
        """``dsigma[..., i, j, l] = d sigma_ij / d x_l``, shape ``(m, h, N, N)``."""
        return self._sigma_and_derivative(x, derivative=True)[1]

    def _sigma_and_derivative(self, x, derivative=True):
        X, single = _as_batch(x)
        m, N = X.shape
        if N != self.N:
            raise ValueError(f"expected points in R^{self.N}, got dimension {N}")
        h = self.h
        sig = np.zeros((m, h, N))
        dsig = np.zeros((m, h, N, N)) if derivative else None

        if self.kind == "euclidean":
            sig[:] = np.eye(N)
        elif self.kind in ("heisenberg", "heisenberg_greiner"):
            n, g = self.n, self._g
            z = X[:, : 2 * n]
            Jz = np.concatenate([z[:, n:], -z[:, :n]], axis=1)
            r = np.linalg.norm(z, axis=1)
            # t-coefficients: X_i -> 2g y_i |z|^(2g-2), Y_i -> -2g x_i |z|^(2g-2)
            fac = 2 * g * r ** (2 * g - 2) if g != 1 else np.full(m, 2.0)
            sig[:, :, : 2 * n] = np.eye(2 * n)
            sig[:, :, 2 * n] = fac[:, None] * Jz
            if derivative:
                J = np.zeros((2 * n, 2 * n))
                J[:n, n:] = np.eye(n)
                J[n:, :n] = -np.eye(n)
                dc = fac[:, None, None] * J[None]
                if g != 1:
                    dc = dc + (2 * g * (2 * g - 2) * r ** (2 * g - 4))[:, None, None] * np.einsum(
                        "mi,ml->mil", Jz, z
                    )
                dsig[:, :, 2 * n, : 2 * n] = dc
        else:  # baouendi_grushin
            n, g = self.n, float(self.gamma)
            xs = X[:, :n]
            r = np.linalg.norm(xs, axis=1)
            sig[:, :n, :n] = np.eye(n)
            coef = (1 + g) * r**g if g != 0 else np.ones(m)
            idx = np.arange(n, N)
            sig[:, idx, idx] = coef[:, None]
            if derivative and g != 0:
                dcoef = ((1 + g) * g * r ** (g - 2))[:, None] * xs
                for j in idx:
                    dsig[:, j, j, :n] = dcoef
        return (_unbatch(sig, single), _unbatch(dsig, single) if derivative else None)

    def A(self, x):
        """Symmetric matrix ``sigma^T sigma``, shape ``(m, N, N)``."""
        s = self.sigma(x)
        return np.einsum("...li,...lj->...ij", s, s)

    def dA(self, x):
        """``dA[..., i, j, l] = d A_ij / d x_l``."""
        s, ds = self._sigma_and_derivative(x, derivative=True)
        t = np.einsum("...ril,...rj->...ijl", ds, s)
        return t + np.swapaxes(t, -3, -2)

    def sigma_divergence(self, x):
        """Vector with j-th entry ``sum_i d_i A_ij``."""
        return np.einsum("...iji->...j", self.dA(x))


# ---------------------------------------------------------------------------
# gauges


@dataclass(frozen=True)
class Gauge:
    """Homogeneous gauge ``d = F^(1/m)`` paired with a frame.

    ``F`` is a sum of powers of Euclidean norms of coordinate blocks, which
    gives closed-form Euclidean gradients and Hessians of ``d``.
    """

    frame: Frame
    exponent_m: float = field(init=False)

    def __post_init__(self):
        f = self.frame
        if f.kind == "euclidean":
            m = 2.0
        elif f.kind == "baouendi_grushin":
            m = 2.0 + 2.0 * f.gamma
        else:
            m = 4.0 * f._g
        object.__setattr__(self, "exponent_m", m)

    @property
    def gauge_exponent(self) -> float:
        """``Q_gauge`` with ``L_p d = (Q_gauge - 1) |grad_L d|^p / d``."""
        return self.frame.Q

    def _F_jet(self, X):
        f = self.frame
        m, N = X.shape
        val = np.zeros(m)
        grad = np.zeros((m, N))
        hess = np.zeros((m, N, N))
        if f.kind == "euclidean":
            return _norm_power(X, 2.0)
        if f.kind == "baouendi_grushin":
            n = f.n
            v1, g1, h1 = _norm_power(X[:, :n], 2.0 + 2.0 * f.gamma)
            v2, g2, h2 = _norm_power(X[:, n:], 2.0)
            val = v1 + v2
            grad[:, :n], grad[:, n:] = g1, g2
            hess[:, :n, :n], hess[:, n:, n:] = h1, h2
            return val, grad, hess
        n2 = 2 * f.n
        v1, g1, h1 = _norm_power(X[:, :n2], 4.0 * f._g)
        t = X[:, n2]
        val = v1 + t**2
        grad[:, :n2], grad[:, n2] = g1, 2 * t
        hess[:, :n2, :n2] = h1
        hess[:, n2, n2] = 2.0
        return val, grad, hess

    def jet(self, x):
        """Return ``(d, grad d, Hess d)`` with Euclidean derivatives."""
        X, single = _as_batch(x)
        F, dF, HF = self._F_jet(X)
        a = 1.0 / self.exponent_m
        d = F**a
        c1 = a * F ** (a - 1)
        c2 = a * (a - 1) * F ** (a - 2)
        grad = c1[:, None] * dF
        hess = c1[:, None, None] * HF + c2[:, None, None] * np.einsum("mi,mj->mij", dF, dF)
        return _unbatch(d, single), _unbatch(grad, single), _unbatch(hess, single)

    def value(self, x):
        X, single = _as_batch(x)
        F = self._F_jet(X)[0]
        return _unbatch(F ** (1.0 / self.exponent_m), single)

    def euclid_gradient(self, x):
        return self.jet(x)[1]

    def horizontal_gradient(self, x):
        """``sigma(x) grad d(x)``."""
        _, g, _ = self.jet(x)
        return np.einsum("...ij,...j->...i", self.frame.sigma(x), g)

    def horizontal_norm(self, x):
        return np.linalg.norm(self.horizontal_gradient(x), axis=-1)

    def singular_distance(self, x):
        """Relative distance ``(distance to singular locus) / d`` (0 on the locus)."""
        X, single = _as_batch(x)
        f = self.frame
        d = self.value(X)
        if f.kind == "euclidean":
            rel = np.ones(X.shape[0])
        elif f.kind == "baouendi_grushin":
            if f.gamma == 0:
                rel = np.ones(X.shape[0])
            else:
                rel = np.linalg.norm(X[:, : f.n], axis=1) / np.where(d > 0, d, 1.0)
        else:
            rel = np.linalg.norm(X[:, : 2 * f.n], axis=1) / np.where(d > 0, d, 1.0)
        rel = np.where(d > 0, rel, 0.0)
        return _unbatch(rel, single)

    def degenerate(self, x, tube: float = 1e-3):
        """Mask of points within a relative ``tube`` of the singular locus."""
        return self.singular_distance(x) <= tube

    def bounding_half_widths(self, r: float) -> np.ndarray:
        """Half-widths of a box containing ``{d <= r}``: ``r**dilation_exponent``."""
        return float(r) ** self.frame.dilation_exponents

    def closed_form_checks(self, x) -> dict:
        """Compare ``|sigma grad d|`` with published closed forms.

        Returns a mapping from formula label to the maximum absolute
        deviation over the supplied points.
        """
        X, _ = _as_batch(x)
        f = self.frame
        got = self.horizontal_norm(X)
        d = self.value(X)
        out = {}
        if f.kind == "euclidean":
            out["1"] = float(np.max(np.abs(got - 1.0)))
        elif f.kind in ("heisenberg", "heisenberg_greiner"):
            rz = np.linalg.norm(X[:, : 2 * f.n], axis=1)
            g = f._g
            out["|z|^(2g-1)/d^(2g-1)"] = float(np.max(np.abs(got - (rz / d) ** (2 * g - 1))))
        else:
            rx = np.linalg.norm(X[:, : f.n], axis=1)
            g = f.gamma
            out["|x|^g/d^g"] = float(np.max(np.abs(got - (rx / d) ** g)))
            out["|x|^(2g)/d^(2g)"] = float(np.max(np.abs(got - (rx / d) ** (2 * g))))
        return out


def make_frame(kind: str, n: int | None = None, k: int | None = None, gamma: float | None = None):
    """Build a ``(Frame, Gauge)`` pair.

    ``kind`` is one of ``euclidean``, ``heisenberg``, ``heisenberg_greiner``
    (alias ``greiner``) or ``baouendi_grushin`` (alias ``grushin``).
    """
    kind = _ALIASES.get(kind, kind)
    if n is None:
        raise ValueError("dimension n is required")
    if kind == "heisenberg_greiner":
        frame = Frame(kind, int(n), gamma=1.0 if gamma is None else float(gamma))
    elif kind == "baouendi_grushin":
        if k is None:
            raise ValueError("Baouendi-Grushin requires k")
        frame = Frame(kind, int(n), int(k), 0.0 if gamma is None else float(gamma))
    else:
        frame = Frame(kind, int(n))
    return frame, Gauge(frame)


def parse_frame_spec(spec) -> tuple[Frame, Gauge]:
    """Accept ``"kind:a,b,c"``, a JSON string, or a mapping with kind/n/k/gamma."""
    if isinstance(spec, str):
        s = spec.strip()
        if s.startswith("{"):
            return parse_frame_spec(json.loads(s))
        kind, _, rest = s.partition(":")
        kind = _ALIASES.get(kind.strip(), kind.strip())
        args = [a for a in rest.split(",") if a.strip()] if rest else []
        if kind in ("euclidean", "heisenberg"):
            if len(args) != 1:
                raise ValueError(f"{kind} takes one argument, e.g. {kind}:3")
            return make_frame(kind, int(args[0]))
        if kind == "heisenberg_greiner":
            if len(args) != 2:
                raise ValueError("heisenberg_greiner takes n,gamma")
            return make_frame(kind, int(args[0]), gamma=float(args[1]))
        if kind == "baouendi_grushin":
            if len(args) != 3:
                raise ValueError("baouendi_grushin takes n,k,gamma")
            return make_frame(kind, int(args[0]), int(args[1]), float(args[2]))
        raise ValueError(f"unknown frame kind {kind!r}")
    spec = dict(spec)
    return make_frame(spec.pop("kind"), spec.get("n"), spec.get("k"), spec.get("gamma"))


# ---------------------------------------------------------------------------
# finite differences


def _fd_scale(X):
    # per-coordinate scale: anisotropic dilations make coordinates differ by orders of magnitude
    return 1.0 + np.abs(X)


def fd_gradient(fun, x):
    """Central-difference gradient; step ``cbrt(eps) * (1 + |x_i|)`` in coordinate i."""
    X, single = _as_batch(x)
    m, N = X.shape
    H = np.cbrt(EPS) * _fd_scale(X)
    out = np.empty((m, N))
    for i in range(N):
        step = np.zeros((m, N))
        step[:, i] = H[:, i]
        out[:, i] = (fun(X + step) - fun(X - step)) / (2 * H[:, i])
    return _unbatch(out, single)


def _fd_hessian_step(fun, X, H):
    m, N = X.shape
    out = np.empty((m, N, N))
    for i in range(N):
        si = np.zeros((m, N))
        si[:, i] = H[:, i]
        for j in range(i, N):
            sj = np.zeros((m, N))
            sj[:, j] = H[:, j]
            val = (fun(X + si + sj) - fun(X + si - sj) - fun(X - si + sj) + fun(X - si - sj)) / (
                4 * H[:, i] * H[:, j]
            )
            out[:, i, j] = out[:, j, i] = val
    return out


def fd_hessian(fun, x):
    """Central-difference Hessian, step ``eps^(1/4) * (1 + |x_i|)`` with one Richardson level."""
    X, single = _as_batch(x)
    H = EPS**0.25 * _fd_scale(X)
    H1 = _fd_hessian_step(fun, X, H)
    H2 = _fd_hessian_step(fun, X, H / 2)
    return _unbatch((4 * H2 - H1) / 3, single)


# ---------------------------------------------------------------------------
# operators


def _check_points(gauge, X, tube=1e-8):
    if gauge is None:
        return
    bad = gauge.degenerate(X, tube)
    if np.any(bad):
        raise DegeneratePointError(
            f"{int(np.sum(bad))} point(s) lie on the singular locus of the {gauge.frame.kind} gauge"
        )


def _gradient(u, X, gauge=None):
    g = getattr(u, "gradient", None)
    if g is not None:
        return g(X)
    _check_points(gauge, X)
    return fd_gradient(u.value, X)


def _hessian(u, X, gauge=None):
    H = getattr(u, "hessian", None)
    if H is not None:
        return H(X)
    _check_points(gauge, X)
    return fd_hessian(u.value, X)


def horizontal_gradient(frame: Frame, u, x, gauge: Gauge | None = None):
    """``sigma(x) grad u(x)``; analytic gradient of ``u`` if it has one, else FD."""
    X, single = _as_batch(x)
    g = _gradient(u, X, gauge)
    return _unbatch(np.einsum("mij,mj->mi", frame.sigma(X), g), single)


def _L_from_jet(frame, X, grad, hess):
    return np.einsum("mj,mj->m", frame.sigma_divergence(X), grad) + np.einsum(
        "mij,mij->m", frame.A(X), hess
    )


def apply_L(frame: Frame, u, x, gauge: Gauge | None = None):
    """``div(A grad u)`` assembled as ``(div A) . grad u + tr(A Hess u)``."""
    X, single = _as_batch(x)
    grad = _gradient(u, X, gauge)
    hess = _hessian(u, X, gauge)
    return _unbatch(_L_from_jet(frame, X, grad, hess), single)


def heisenberg_sublaplacian(frame: Frame, u, x):
    """Second route for the Heisenberg sub-Laplacian.

    ``Delta_z u + 4 |z|^2 u_tt + 4 d_t(T u)`` with
    ``T = sum_j (y_j d/dx_j - x_j d/dy_j)``.
    """
    if frame.kind != "heisenberg" and not (frame.kind == "heisenberg_greiner" and frame.gamma == 1):
        raise ValueError("decomposition only valid for the Heisenberg frame")
    X, single = _as_batch(x)
    n = frame.n
    H = _hessian(u, X)
    z = X[:, : 2 * n]
    lap_z = np.trace(H[:, : 2 * n, : 2 * n], axis1=1, axis2=2)
    u_tt = H[:, 2 * n, 2 * n]
    xs, ys = z[:, :n], z[:, n:]
    dtT = np.sum(ys * H[:, :n, 2 * n], axis=1) - np.sum(xs * H[:, n : 2 * n, 2 * n], axis=1)
    out = lap_z + 4 * np.sum(z**2, axis=1) * u_tt + 4 * dtT
    return _unbatch(out, single)


def apply_Lp(frame: Frame, gauge: Gauge | None, p: float, u, x):
    """``div(|grad_L u|^(p-2) A grad u)``.

    Expanded as ``|G|^(p-2) L u + (p-2)/2 |G|^(p-4) (A grad u) . grad |G|^2``
    where ``G = sigma grad u`` and
    ``d_k |G|^2 = 2 (Hess u A grad u)_k + grad u^T (d_k A) grad u``.
    """
    p = float(p)
    if p < 2:
        raise ValueError("p must be >= 2")
    X, single = _as_batch(x)
    grad = _gradient(u, X, gauge)
    hess = _hessian(u, X, gauge)
    Lu = _L_from_jet(frame, X, grad, hess)
    if p == 2:
        return _unbatch(Lu, single)
    A = frame.A(X)
    Agrad = np.einsum("mij,mj->mi", A, grad)
    G2 = np.einsum("mi,mi->m", grad, Agrad)
    if p < 4 and np.any(G2 == 0):
        raise DegeneratePointError("horizontal gradient vanishes; L_p undefined for p < 4")
    dG2 = 2 * np.einsum("mkj,mj->mk", hess, Agrad) + np.einsum("mi,mijk,mj->mk", grad, frame.dA(X), grad)
    G = np.sqrt(G2)
    with np.errstate(divide="ignore", invalid="ignore"):
        second = np.where(G2 > 0, G ** (p - 4), 0.0) * np.einsum("mk,mk->m", Agrad, dG2)
    out = G ** (p - 2) * Lu + 0.5 * (p - 2) * second
    return _unbatch(out, single)


def radial_operator_apply(frame: Frame, gauge: Gauge, profile, x, p: float = 2.0):
    """Closed form of ``L_p(phi(d))`` for gauge-radial functions.

    ``profile`` is a triple of callables ``(phi, dphi, d2phi)``. Uses the
    gauge identity, so for p = 2 the result is
    ``|grad_L d|^2 (phi''(d) + (Q-1) phi'(d)/d)`` and in general
    ``|phi'|^(p-2) |grad_L d|^p ((p-1) phi'' + (Q-1) phi'/d)``.
    """
    X, single = _as_batch(x)
    if np.any(gauge.value(X) == 0):
        raise DegeneratePointError("origin is excluded")
    phi, dphi, d2phi = profile
    d = gauge.value(X)
    D2 = gauge.horizontal_norm(X) ** 2
    q = gauge.gauge_exponent
    d1, d2 = dphi(d), d2phi(d)
    p = float(p)
    if p == 2:
        out = D2 * (d2 + (q - 1) * d1 / d)
    else:
        out = np.abs(d1) ** (p - 2) * D2 ** (p / 2) * ((p - 1) * d2 + (q - 1) * d1 / d)
    return _unbatch(out, single)


def random_points(frame: Frame, gauge: Gauge, n_points: int, seed: int,
                  r_range=(0.5, 2.0), tube: float = 1e-3):
    """Uniform points in a gauge annulus, outside a relative tube around the singular locus."""
    rng = np.random.default_rng(seed)
    lo, hi = r_range
    half = gauge.bounding_half_widths(hi)
    pts = []
    count = 0
    while count < n_points:
        X = rng.uniform(-1.0, 1.0, size=(max(4 * n_points, 1024), frame.N)) * half
        d = gauge.value(X)
        keep = (d >= lo) & (d <= hi) & ~gauge.degenerate(X, tube)
        pts.append(X[keep])
        count += int(keep.sum())
    return np.concatenate(pts)[:n_points]
