"""Closed-form sharp constants, extremal exponents and Rellich admissibility.

Every constant is evaluated twice: in the general "beta" parameterization
(where the gauge satisfies ``L_p d = (1 - beta)(p - 1) |grad_L d|^p / d``)
and in the homogeneous-dimension form. The two are required to agree to
``FORM_RTOL``; a disagreement raises ``AssertionError``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field

FORM_RTOL = 1e-12
_ZERO_TOL = 1e-12


class CriticalWeightWarning(UserWarning):
    """A sharp constant vanishes for the requested (critical) weight."""


class InadmissibleParameters(ValueError):
    """Rellich hypotheses fail; ``reasons`` lists the violated clauses."""

    def __init__(self, reasons):
        self.reasons = list(reasons)
        super().__init__("inadmissible Rellich parameters: " + "; ".join(self.reasons))


@dataclass(frozen=True)
class InequalityParams:
    """Exponent ``p >= 2``, weight exponent ``theta`` and homogeneous dimension ``Q``."""

    p: float
    theta: float
    Q: float

    def __post_init__(self):
        for name in ("p", "theta", "Q"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite")
        if self.p < 2:
            raise ValueError(f"p must be >= 2, got {self.p}")
        if self.Q <= 0:
            raise ValueError("Q must be positive")

    @classmethod
    def for_frame(cls, frame, p: float, theta: float) -> "InequalityParams":
        return cls(float(p), float(theta), float(frame.Q))

    @property
    def beta_hardy(self) -> float:
        """beta with ``(1 - beta)(p - 1) = Q - 1``."""
        return (self.p - self.Q) / (self.p - 1)

    @property
    def beta_rellich(self) -> float:
        """beta with ``1 - beta = Q - 1`` (the p = 2 gauge identity)."""
        return 2.0 - self.Q


def _agree(a: float, b: float, what: str) -> None:
    if not math.isclose(a, b, rel_tol=FORM_RTOL, abs_tol=FORM_RTOL):
        raise AssertionError(f"{what}: parameterizations disagree ({a!r} vs {b!r})")


def _warn_critical(what: str, params: InequalityParams) -> None:
    warnings.warn(
        f"{what} constant vanishes at the critical weight theta={params.theta} (p={params.p}, Q={params.Q})",
        CriticalWeightWarning,
        stacklevel=3,
    )


# ---------------------------------------------------------------------------
# individual constants


def _hardy_bases(params):
    p, th, Q, b = params.p, params.theta, params.Q, params.beta_hardy
    return abs(p * (th - 1) + b * (p - 1)), abs(Q - p * th)


def hardy_sharp_constant(params: InequalityParams) -> float:
    """``|p(theta-1) + beta(p-1)|^p / p^p`` (equivalently ``|Q - p theta|^p / p^p``).

    Returns exactly 0 with a :class:`CriticalWeightWarning` at ``theta = Q/p``.
    """
    p = params.p
    b_form, q_form = _hardy_bases(params)
    _agree(b_form, q_form, "Hardy base")
    if q_form <= _ZERO_TOL * max(1.0, params.Q):
        _warn_critical("Hardy", params)
        return 0.0
    c_beta, c_q = (b_form / p) ** p, (q_form / p) ** p
    _agree(c_beta, c_q, "Hardy constant")
    return c_beta


def _rellich_bases(params):
    p, th, Q, b = params.p, params.theta, params.Q, params.beta_rellich
    beta_form = (2 - b - p * th - 2 * p) * (p * th + 2 * p - 2 - b * (p - 1)) / p**2
    q_form = (Q - p * (th + 2)) * (p * th + Q * (p - 1)) / p**2
    return beta_form, q_form


def rellich_product(params: InequalityParams) -> float:
    """Signed base ``(Q - p(theta+2))(p theta + Q(p-1)) / p^2``; admissible iff >= 0."""
    b_form, q_form = _rellich_bases(params)
    _agree(b_form, q_form, "Rellich product")
    return b_form


def auxiliary_hardy_constant(params: InequalityParams) -> float:
    """``(p theta + 2p - 2 + beta)^2 / p^2`` with beta = 2 - Q, i.e. ``(Q - p(theta+2))^2 / p^2``."""
    p, th, Q, b = params.p, params.theta, params.Q, params.beta_rellich
    c_beta = (p * th + 2 * p - 2 + b) ** 2 / p**2
    c_q = (Q - p * (th + 2)) ** 2 / p**2
    _agree(c_beta, c_q, "auxiliary Hardy constant")
    if abs(Q - p * (th + 2)) <= _ZERO_TOL * max(1.0, Q):
        _warn_critical("auxiliary Hardy", params)
        return 0.0
    return c_beta


def extremal_exponents(params: InequalityParams) -> tuple[float, float]:
    """Exponents ``a`` of the maximizers ``d^a``: ``((p theta - Q)/p, (p(theta+2) - Q)/p)``."""
    p, th, Q = params.p, params.theta, params.Q
    h_beta = (p * (th - 1) + params.beta_hardy * (p - 1)) / p
    h_q = (p * th - Q) / p
    _agree(h_beta, h_q, "Hardy extremal exponent")
    r_beta = (p * th + 2 * p - 2 + params.beta_rellich) / p
    r_q = (p * (th + 2) - Q) / p
    _agree(r_beta, r_q, "Rellich extremal exponent")
    return h_q, r_q


# ---------------------------------------------------------------------------
# admissibility


@dataclass(frozen=True)
class Admissibility:
    """Truthy verdict with the list of violated clauses (empty when admissible)."""

    ok: bool
    reasons: tuple = ()
    clauses: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.ok

    def to_dict(self) -> dict:
        return {"admissible": self.ok, "reasons": list(self.reasons), "clauses": dict(self.clauses)}


PRODUCT_CLAUSE = "(Q-p(theta+2))(p*theta+Q(p-1)) >= 0"


def _integrability_clauses(params: InequalityParams, frame) -> dict:
    """Frame-specific local integrability of ``d^(-p theta) |grad_L d|^(-2(p-1))`` away from 0."""
    if frame is None or frame.kind == "euclidean":
        return {}
    p, Q = params.p, params.Q
    if frame.kind == "heisenberg":
        return {"Q > 2p": Q > 2 * p}
    if frame.kind == "heisenberg_greiner":
        g, n = frame.gamma, frame.n
        return {
            "Q > 2p(2g-1)+4(1-g)": Q > 2 * p * (2 * g - 1) + 4 * (1 - g),
            # exact integrability of |z|^(-(2g-1)2(p-1)) near z = 0 in R^(2n)
            "2n > 2(2g-1)(p-1)": 2 * n > 2 * (2 * g - 1) * (p - 1),
        }
    g, k = frame.gamma, frame.k
    return {"Q > 2g(p-1)+(1+g)k": Q > 2 * g * (p - 1) + (1 + g) * k}


def rellich_admissible(params: InequalityParams, frame=None) -> Admissibility:
    """Product condition conjoined with the frame's integrability condition."""
    if frame is not None and not math.isclose(frame.Q, params.Q):
        raise ValueError(f"params.Q={params.Q} does not match frame Q={frame.Q}")
    clauses = {PRODUCT_CLAUSE: rellich_product(params) >= -_ZERO_TOL}
    clauses.update(_integrability_clauses(params, frame))
    reasons = tuple(name for name, ok in clauses.items() if not ok)
    return Admissibility(not reasons, reasons, clauses)


def rellich_sharp_constant(params: InequalityParams, frame=None) -> float:
    """``((Q - p(theta+2))(p theta + Q(p-1)) / p^2)^p``.

    Raises :class:`InadmissibleParameters` when the product condition (or,
    with ``frame``, its integrability condition) fails.
    """
    adm = rellich_admissible(params, frame)
    if not adm:
        raise InadmissibleParameters(adm.reasons)
    b_form, q_form = _rellich_bases(params)
    if abs(q_form) <= _ZERO_TOL * max(1.0, params.Q) ** 2:
        _warn_critical("Rellich", params)
        return 0.0
    p = params.p
    c_beta, c_q = b_form**p, q_form**p
    _agree(c_beta, c_q, "Rellich constant")
    return c_beta


def constant_forms(params: InequalityParams) -> dict:
    """Both evaluations of every constant, for cross-form audits.

    The Rellich entry compares the signed base when it is negative (the
    power is then undefined for non-integer p).
    """
    p = params.p
    hb, hq = _hardy_bases(params)
    rb, rq = _rellich_bases(params)
    th, b = params.theta, params.beta_rellich
    out = {
        "hardy": ((hb / p) ** p, (hq / p) ** p),
        "auxiliary_hardy": ((p * th + 2 * p - 2 + b) ** 2 / p**2, (params.Q - p * (th + 2)) ** 2 / p**2),
        "rellich": (rb**p, rq**p) if rq >= 0 and rb >= 0 else (rb, rq),
    }
    h1, r1 = (p * th - params.Q) / p, (p * (th + 2) - params.Q) / p
    out["hardy_extremal_exponent"] = ((p * (th - 1) + params.beta_hardy * (p - 1)) / p, h1)
    out["rellich_extremal_exponent"] = ((p * th + 2 * p - 2 + b) / p, r1)
    return out


@dataclass(frozen=True)
class SharpConstants:
    hardy: float
    rellich: float | None
    auxiliary_hardy: float
    hardy_extremal_exponent: float
    rellich_extremal_exponent: float
    rellich_admissibility: Admissibility
    critical: tuple = ()

    def to_dict(self) -> dict:
        d = asdict(self)
        d["rellich_admissibility"] = self.rellich_admissibility.to_dict()
        d["critical"] = list(self.critical)
        return d


def sharp_constants(params: InequalityParams, frame=None) -> SharpConstants:
    """Collect every constant; ``rellich`` is None when inadmissible."""
    critical = []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", CriticalWeightWarning)
        hardy = hardy_sharp_constant(params)
        aux = auxiliary_hardy_constant(params)
        adm = rellich_admissible(params, frame)
        rellich = rellich_sharp_constant(params, frame) if adm else None
    for w in caught:
        if issubclass(w.category, CriticalWeightWarning):
            critical.append(str(w.message).split(" constant")[0])
        else:  # pragma: no cover - re-emit unrelated warnings
            warnings.warn_explicit(w.message, w.category, w.filename, w.lineno)
    if critical:
        warnings.warn("critical weight: " + ", ".join(critical), CriticalWeightWarning, stacklevel=2)
    h_exp, r_exp = extremal_exponents(params)
    return SharpConstants(hardy, rellich, aux, h_exp, r_exp, adm, tuple(critical))
