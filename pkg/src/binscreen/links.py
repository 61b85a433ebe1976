"""Symmetric link families (probit, logit) and their Gaussian-smoothing integrals.

A link family here is the inverse-link cdf ``H`` of a binary regression,
restricted to the class whose density ``h = H'`` is symmetric about zero
(both the probit and the logit links qualify).  On top of the elementary
cdf/density evaluations this module provides the two smoothing integrals
that the population-limit computations are built from:

* ``mixture_integral(link, beta0, v)``  ->  ``int phi(t; beta0, v) h(t) dt``
* ``population_mean(link, beta0, v)``   ->  ``E[H(beta0 + W)], W ~ N(0, v)``

Both are evaluated by Gauss-Hermite quadrature recentred at ``beta0`` and
scaled by ``sqrt(v)``; the mixing representation of ``H`` is never touched.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import log_ndtr, logit as _logit, ndtr, ndtri

__all__ = [
    "LinkKind",
    "LinkFamily",
    "link_cdf",
    "link_density",
    "link_inverse_cdf",
    "mixture_integral",
    "population_mean",
]

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


class LinkKind(enum.Enum):
    PROBIT = "probit"
    LOGIT = "logit"


@lru_cache(maxsize=8)
def _hermgauss(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Hermite nodes/weights, pre-divided by sqrt(pi) so that
    sum(w * f(x)) integrates f against the standard normal after the
    change of variables x -> mu + sqrt(2) * sigma * x."""
    x, w = np.polynomial.hermite.hermgauss(n)
    return x, w / math.sqrt(math.pi)


@dataclass(frozen=True)
class LinkFamily:
    """A symmetric inverse-link cdf, selected by kind.

    ``quadrature_nodes`` controls the Gauss-Hermite rule used by the
    smoothing integrals; 128 nodes keep the probit integrals within 1e-8
    of their closed forms for variances up to ~10.
    """

    kind: LinkKind
    quadrature_nodes: int = 128

    def __post_init__(self):
        if not isinstance(self.kind, LinkKind):
            raise ValueError(f"kind must be a LinkKind, got {self.kind!r}")
        if self.quadrature_nodes < 1:
            raise ValueError("quadrature_nodes must be positive")

    @classmethod
    def probit(cls, quadrature_nodes: int = 128) -> "LinkFamily":
        return cls(LinkKind.PROBIT, quadrature_nodes)

    @classmethod
    def logit(cls, quadrature_nodes: int = 128) -> "LinkFamily":
        return cls(LinkKind.LOGIT, quadrature_nodes)

    @classmethod
    def from_name(cls, name: str, quadrature_nodes: int = 128) -> "LinkFamily":
        try:
            return cls(LinkKind(name.lower()), quadrature_nodes)
        except ValueError:
            raise ValueError(f"unknown link {name!r}; expected 'probit' or 'logit'") from None

    @property
    def name(self) -> str:
        return self.kind.value

    # -- elementary evaluations (vectorized, overflow-safe) ----------------

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind is LinkKind.PROBIT:
            return ndtr(t)
        return 1.0 / (1.0 + np.exp(-np.clip(t, -745.0, 745.0)))

    def pdf(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind is LinkKind.PROBIT:
            return np.exp(-0.5 * t * t - _LOG_SQRT_2PI)
        # logistic density via exp(-|t|): immune to overflow at large |t|
        a = np.exp(-np.abs(t))
        return a / (1.0 + a) ** 2

    def log_cdf(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind is LinkKind.PROBIT:
            return log_ndtr(t)
        return -np.logaddexp(0.0, -t)

    def log_sf(self, t):
        """log(1 - H(t)) = log H(-t), by symmetry."""
        return self.log_cdf(-np.asarray(t, dtype=float))

    def log_pdf(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind is LinkKind.PROBIT:
            return -0.5 * t * t - _LOG_SQRT_2PI
        a = np.abs(t)
        return -a - 2.0 * np.log1p(np.exp(-a))

    def inverse_cdf(self, p):
        p = np.asarray(p, dtype=float)
        if np.any((p <= 0.0) | (p >= 1.0)):
            raise ValueError("inverse cdf requires probabilities strictly inside (0, 1)")
        if self.kind is LinkKind.PROBIT:
            return ndtri(p)
        return _logit(p)


def _check_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")
    return value


def _check_variance(v: float) -> float:
    v = _check_finite("v", v)
    if v < 0.0:
        raise ValueError(f"v must be nonnegative, got {v}")
    return v


def link_cdf(link: LinkFamily, t: float) -> float:
    """Evaluate H(t) for the given family.  Strictly increasing, H(0) = 1/2."""
    return float(link.cdf(_check_finite("t", t)))


def link_density(link: LinkFamily, t: float) -> float:
    """Evaluate h(t) = dH/dt; symmetric about 0."""
    return float(link.pdf(_check_finite("t", t)))


def link_inverse_cdf(link: LinkFamily, p: float) -> float:
    """Evaluate H^{-1}(p) for p in (0, 1)."""
    return float(link.inverse_cdf(p))


def mixture_integral(link: LinkFamily, beta0: float, v: float) -> float:
    """Gaussian smoothing of the link density: int phi(t; beta0, v) h(t) dt.

    Returns h(beta0) when v = 0.  For the probit family this equals the
    normal density phi(0; beta0, 1 + v) exactly; for other families it is
    evaluated by Gauss-Hermite quadrature in t-space, where the integrand
    is smooth regardless of the mixing density behind H.
    """
    beta0 = _check_finite("beta0", beta0)
    v = _check_variance(v)
    if v == 0.0:
        return float(link.pdf(beta0))
    x, w = _hermgauss(link.quadrature_nodes)
    t = beta0 + math.sqrt(2.0 * v) * x
    return float(np.dot(w, link.pdf(t)))


def population_mean(link: LinkFamily, beta0: float, v: float) -> float:
    """E[H(beta0 + W)] for W ~ Normal(0, v); equals H(beta0) when v = 0.

    Strictly increasing in beta0, which the intercept root-solves rely on.
    For the probit family the value agrees with the closed form
    Phi(beta0 / sqrt(1 + v)).
    """
    beta0 = _check_finite("beta0", beta0)
    v = _check_variance(v)
    if v == 0.0:
        return float(link.cdf(beta0))
    x, w = _hermgauss(link.quadrature_nodes)
    t = beta0 + math.sqrt(2.0 * v) * x
    return float(np.dot(w, link.cdf(t)))
