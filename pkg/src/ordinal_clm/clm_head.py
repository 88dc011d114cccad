"""Cumulative link model output layer.

The head maps a scalar latent projection ``l(x)`` to a vector of ``Q``
ordered class probabilities::

    f(x) = l(x) / tau
    P(y <= C_q | x) = F(b_q - f(x)),   q = 0, ..., Q-2
    P(y = C_q | x) = P(y <= C_q | x) - P(y <= C_{q-1} | x)

where ``F`` is the cdf associated with the link and the thresholds are
``b_0 = b1`` and ``b_q = b1 + sum(alpha[:q] ** 2)`` so they are always
nondecreasing while every parameter stays unconstrained.

All functions accept a scalar latent value or a 1-D array of them.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import special

from .exceptions import DomainError

#: Probabilities are kept inside [EPS_PROB, 1 - EPS_PROB].
EPS_PROB = 1e-15
#: Lower bound applied to ``tau`` after every optimizer step.
TAU_MIN = 1e-3
_CLOGLOG_SATURATION = 30.0


class LinkFunction(str, Enum):
    LOGIT = "logit"
    PROBIT = "probit"
    CLOGLOG = "cloglog"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            names = ", ".join(m.value for m in cls)
            raise DomainError(f"unknown link {value!r}; expected one of {names}") from None


def _check_finite(z, what="z"):
    z = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(z)):
        raise DomainError(f"{what} must be finite")
    return z


def _raw_cdf(link, z):
    if link is LinkFunction.LOGIT:
        return special.expit(z)
    if link is LinkFunction.PROBIT:
        return special.ndtr(z)
    # -expm1(-e^z) keeps precision for very negative z
    with np.errstate(over="ignore"):
        out = -np.expm1(-np.exp(np.minimum(z, _CLOGLOG_SATURATION)))
    out = np.where(z > _CLOGLOG_SATURATION, 1.0 - EPS_PROB, out)
    return np.where(z < -_CLOGLOG_SATURATION, EPS_PROB, out)


def link_cdf(link, z):
    """Cumulative probability ``F(z)`` for the given link, clamped to
    ``[EPS_PROB, 1 - EPS_PROB]``.

    Parameters
    ----------
    link : LinkFunction or str
    z : float or ndarray
        Distance ``b_q - f(x)`` on the latent scale. Must be finite.
    """
    link = LinkFunction.parse(link)
    z = _check_finite(z)
    out = np.clip(_raw_cdf(link, z), EPS_PROB, 1.0 - EPS_PROB)
    return float(out) if out.ndim == 0 else out


def link_pdf(link, z):
    """Density ``dF/dz`` of the link distribution (unclamped)."""
    link = LinkFunction.parse(link)
    z = _check_finite(z)
    if link is LinkFunction.LOGIT:
        s = special.expit(z)
        out = s * (1.0 - s)
    elif link is LinkFunction.PROBIT:
        out = np.exp(-0.5 * z * z) / np.sqrt(2.0 * np.pi)
    else:
        zc = np.minimum(z, _CLOGLOG_SATURATION)
        out = np.exp(zc - np.exp(zc))
    return float(out) if np.ndim(out) == 0 else out


def inverse_link(link, p):
    """Inverse of :func:`link_cdf`, i.e. the link function itself."""
    link = LinkFunction.parse(link)
    p = np.asarray(p, dtype=float)
    if np.any((p <= 0) | (p >= 1)):
        raise DomainError("p must lie strictly inside (0, 1)")
    if link is LinkFunction.LOGIT:
        out = special.logit(p)
    elif link is LinkFunction.PROBIT:
        out = special.ndtri(p)
    else:
        out = np.log(-np.log1p(-p))
    return float(out) if out.ndim == 0 else out


@dataclass
class ClmParameters:
    """Learnable parameters of the ordinal head.

    ``alpha`` holds the ``Q - 2`` threshold increments; the number of
    classes is therefore implied by its length.
    """

    b1: float
    alpha: np.ndarray = field(default_factory=lambda: np.zeros(0))
    tau: float = 1.0

    def __post_init__(self):
        self.b1 = float(self.b1)
        self.alpha = np.asarray(self.alpha, dtype=float).reshape(-1)
        self.tau = float(self.tau)
        if not (np.isfinite(self.b1) and np.all(np.isfinite(self.alpha))):
            raise DomainError("threshold parameters must be finite")
        if not (self.tau > 0 and np.isfinite(self.tau)):
            raise DomainError(f"tau must be positive and finite, got {self.tau}")

    @property
    def q_classes(self):
        return self.alpha.size + 2

    @classmethod
    def initial(cls, q_classes):
        """Thresholds evenly spaced on [-2, 2], ``tau = 1``."""
        if q_classes < 2:
            raise DomainError("need at least two classes")
        n_inc = q_classes - 2
        alpha = np.full(n_inc, np.sqrt(4.0 / n_inc)) if n_inc else np.zeros(0)
        return cls(b1=-2.0, alpha=alpha, tau=1.0)

    def thresholds(self):
        return build_thresholds(self)

    def copy(self):
        return ClmParameters(self.b1, self.alpha.copy(), self.tau)


@dataclass
class ClmForwardRecord:
    """Output of :func:`clm_forward`.

    For a scalar latent input the arrays are 1-D; for ``N`` latent values
    ``cumulative`` is ``(N, Q-1)`` and ``probs`` is ``(N, Q)``.
    """

    projection: np.ndarray
    cumulative: np.ndarray
    probs: np.ndarray


@dataclass
class ClmGradients:
    d_latent: np.ndarray
    d_b1: float
    d_alpha: np.ndarray
    d_tau: float


def build_thresholds(params):
    """Return ``(b1, b1 + a1^2, b1 + a1^2 + a2^2, ...)`` of length ``Q - 1``."""
    inc = np.concatenate(([params.b1], params.alpha ** 2))
    b = np.cumsum(inc)
    assert np.all(np.diff(b) >= 0), "thresholds lost monotonicity"
    return b


def _forward_parts(params, link, latent):
    link = LinkFunction.parse(link)
    latent = _check_finite(latent, "latent")
    scalar = latent.ndim == 0
    l = np.atleast_1d(latent).astype(float)
    if l.ndim != 1:
        raise DomainError("latent must be a scalar or 1-D array")
    b = build_thresholds(params)
    f = l / params.tau
    z = b[None, :] - f[:, None]
    raw = _raw_cdf(link, z)
    cum = np.clip(raw, EPS_PROB, 1.0 - EPS_PROB)
    n = l.size
    edges = np.concatenate((np.zeros((n, 1)), cum, np.ones((n, 1))), axis=1)
    raw_probs = np.diff(edges, axis=1)
    floored = np.maximum(raw_probs, EPS_PROB)
    total = floored.sum(axis=1, keepdims=True)
    probs = floored / total
    return dict(scalar=scalar, l=l, b=b, f=f, z=z, raw=raw, cum=cum,
                raw_probs=raw_probs, total=total, probs=probs, link=link)


def clm_forward(params, link, latent):
    """Class probabilities for one or many latent projections."""
    parts = _forward_parts(params, link, latent)
    if parts["scalar"]:
        return ClmForwardRecord(float(parts["f"][0]), parts["cum"][0], parts["probs"][0])
    return ClmForwardRecord(parts["f"], parts["cum"], parts["probs"])


def clm_gradients(params, link, latent, upstream):
    """Backpropagate ``upstream = dLoss/dprobs`` through the head.

    Returns per-sample ``d_latent`` and parameter gradients summed over
    the samples. The clamps are differentiated exactly: a clamped
    cumulative or floored probability passes no gradient.
    """
    parts = _forward_parts(params, link, latent)
    probs, total = parts["probs"], parts["total"]
    g = np.asarray(upstream, dtype=float).reshape(probs.shape)

    # renormalisation p = p_floor / sum(p_floor)
    g_floor = (g - np.sum(g * probs, axis=1, keepdims=True)) / total
    g_raw = np.where(parts["raw_probs"] > EPS_PROB, g_floor, 0.0)
    # raw_probs[q] = cum[q] - cum[q-1]
    g_cum = g_raw[:, :-1] - g_raw[:, 1:]
    z = parts["z"]
    raw = parts["raw"]
    live = (raw > EPS_PROB) & (raw < 1.0 - EPS_PROB)
    if parts["link"] is LinkFunction.CLOGLOG:
        live &= np.abs(z) <= _CLOGLOG_SATURATION
    g_z = np.where(live, g_cum * link_pdf(parts["link"], z), 0.0)

    g_f = -g_z.sum(axis=1)
    tau = params.tau
    d_latent = g_f / tau
    d_tau = float(np.sum(g_f * (-parts["l"] / tau ** 2)))
    g_b = g_z.sum(axis=0)
    d_b1 = float(g_b.sum())
    # b_q depends on alpha_i for every q > i
    tail = np.cumsum(g_b[::-1])[::-1]
    d_alpha = 2.0 * params.alpha * tail[1:]
    if parts["scalar"]:
        d_latent = float(d_latent[0])
    return ClmGradients(d_latent, d_b1, d_alpha, d_tau)


def predict_interval(params, latent):
    """Class whose threshold interval contains ``f = latent / tau``.

    A projection lying exactly on a threshold goes to the lower class.
    """
    latent = _check_finite(latent, "latent")
    f = latent / params.tau
    out = np.searchsorted(build_thresholds(params), f, side="left")
    return int(out) if np.ndim(out) == 0 else out


def predict_argmax(record):
    """Most probable class; ties resolve to the lowest index."""
    probs = record.probs if isinstance(record, ClmForwardRecord) else np.asarray(record)
    out = np.argmax(probs, axis=-1)
    return int(out) if np.ndim(out) == 0 else out
