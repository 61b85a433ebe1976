"""Population limits of the screening statistics under misspecification.

Given the true Bernoulli regression and a working subset of predictors,
the least-squares coefficients converge to

    beta_ls = (gamma_1 + Sigma_11^{-1} Sigma_12 gamma_2) * c1,

with c1 the Gaussian smoothing of the true-link density at the linear
predictor's variance, and the working-link MLE converges to the
proportional vector beta_ml = beta_ls / c2, where c2 solves a coupled
fixed point in (beta0_ml, beta_ml).  This module evaluates both limits,
the per-predictor contamination term, and the whole per-predictor curve
used by the screening-quality plots.  Predictor indices are 1-based.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.stats import norm

from .datagen import TrueModel
from .errors import SolverError
from .links import LinkFamily, mixture_integral, population_mean

__all__ = [
    "PopulationCoefficients",
    "contamination",
    "beta_ls_population",
    "beta_ml_population",
    "population_limits",
    "probit_cross_moment",
    "lsn_mean",
    "population_curve",
    "PopulationCurve",
]


@dataclass
class PopulationCoefficients:
    """Limit coefficients of a working model on the predictor subset."""

    subset: tuple[int, ...]
    beta_ls: np.ndarray
    c1: float
    beta0_ml: float
    beta_ml: np.ndarray
    c2: float


def _subset_indices(model: TrueModel, subset: Iterable[int]) -> np.ndarray:
    idx = np.asarray(sorted(set(int(j) for j in subset)), dtype=int)
    if idx.size == 0:
        raise ValueError("subset must be nonempty")
    if idx.min() < 1 or idx.max() > model.p:
        raise ValueError(f"subset indices must lie in 1..{model.p}")
    return idx - 1


def contamination(model: TrueModel, j: int) -> float:
    """Marginal-slope bias from the other active predictors:
    sum_{i != j} sigma_ij gamma_i / sigma_jj."""
    if not 1 <= j <= model.p:
        raise ValueError(f"j must lie in 1..{model.p}")
    sigma = model.sigma()
    k = j - 1
    return float((sigma[k] @ model.gamma - sigma[k, k] * model.gamma[k]) / sigma[k, k])


def beta_ls_population(model: TrueModel, subset: Iterable[int]) -> tuple[np.ndarray, float]:
    """Probability limit of the least-squares slopes of the working model.

    Returns (beta_ls, c1).  For a singleton subset {j} the vector reduces
    to (gamma_j + contamination(model, j)) * c1.
    """
    idx = _subset_indices(model, subset)
    rest = np.setdiff1d(np.arange(model.p), idx, assume_unique=True)
    sigma = model.sigma()
    s11 = sigma[np.ix_(idx, idx)]
    g1 = model.gamma[idx]
    direction = g1.copy()
    if rest.size:
        s12 = sigma[np.ix_(idx, rest)]
        g2 = model.gamma[rest]
        direction = g1 + np.linalg.solve(s11, s12 @ g2)
    c1 = mixture_integral(model.link, model.gamma0, model.linear_variance())
    return direction * c1, c1


def beta_ml_population(
    model: TrueModel,
    working_link: LinkFamily,
    subset: Iterable[int],
    *,
    tol: float = 1e-10,
    max_iter: int = 500,
) -> tuple[float, np.ndarray, float]:
    """Limit of the working-link MLE on the subset, via the coupled fixed point.

    Alternates a slope update beta_1 <- beta_ls / c2(beta0, beta_1' S11 beta_1)
    with an intercept root-solve matching the working population mean to the
    true one.  The slope iterates stay on the ray spanned by beta_ls, so the
    proportionality beta_ml * c2 = beta_ls holds by construction; damping
    kicks in if the scalar update starts oscillating.

    Returns (beta0_ml, beta_ml, c2).
    """
    idx = _subset_indices(model, subset)
    sigma = model.sigma()
    s11 = sigma[np.ix_(idx, idx)]
    beta_ls, _ = beta_ls_population(model, subset)
    m_star = population_mean(model.link, model.gamma0, model.linear_variance())

    def intercept_for(v: float) -> float:
        f = lambda b0: population_mean(working_link, b0, v) - m_star
        lo, hi = -40.0, 40.0
        if f(lo) > 0.0 or f(hi) < 0.0:
            raise SolverError(f"population mean {m_star} out of reach for the working link")
        return brentq(f, lo, hi, xtol=1e-13)

    b1 = beta_ls.copy()
    b0 = float(working_link.inverse_cdf(m_star))
    prev_delta = None
    damping = 1.0
    for _ in range(max_iter):
        v = float(b1 @ s11 @ b1)
        b0_new = intercept_for(v)
        c2 = mixture_integral(working_link, b0_new, v)
        delta = beta_ls / c2 - b1
        if prev_delta is not None and float(delta @ prev_delta) < 0.0:
            damping = 0.5
        b1_new = b1 + damping * delta
        shift = max(abs(b0_new - b0), float(np.max(np.abs(b1_new - b1))))
        b0, b1 = b0_new, b1_new
        prev_delta = delta
        if shift < tol:
            # final consistent pass: evaluate c2 at the converged point and
            # re-derive the slope so beta_ml * c2 == beta_ls exactly
            v = float(b1 @ s11 @ b1)
            b0 = intercept_for(v)
            c2 = mixture_integral(working_link, b0, v)
            return b0, beta_ls / c2, c2
    raise SolverError(
        f"fixed point did not converge in {max_iter} iterations",
        last_iterate=(b0, b1),
    )


def population_limits(
    model: TrueModel, working_link: LinkFamily, subset: Iterable[int]
) -> PopulationCoefficients:
    """Both limits for one working model, bundled."""
    idx = _subset_indices(model, subset)
    beta_ls, c1 = beta_ls_population(model, subset)
    beta0_ml, beta_ml, c2 = beta_ml_population(model, working_link, subset)
    return PopulationCoefficients(
        subset=tuple(int(j) + 1 for j in idx),
        beta_ls=beta_ls,
        c1=c1,
        beta0_ml=beta0_ml,
        beta_ml=beta_ml,
        c2=c2,
    )


def probit_cross_moment(model: TrueModel, subset: Iterable[int]) -> np.ndarray:
    """Closed form E[Z_1 Y] when the true link is probit:
    (Sigma_11 gamma_1 + Sigma_12 gamma_2) * phi(0; gamma0, 1 + gamma' Sigma gamma).

    No quadrature is involved, which makes this an independent oracle for
    the generic beta_ls path (beta_ls = Sigma_11^{-1} E[Z_1 (Y - EY)]).
    """
    if model.link.name != "probit":
        raise ValueError("closed-form cross moment requires a probit true link")
    idx = _subset_indices(model, subset)
    rest = np.setdiff1d(np.arange(model.p), idx, assume_unique=True)
    sigma = model.sigma()
    vec = sigma[np.ix_(idx, idx)] @ model.gamma[idx]
    if rest.size:
        vec = vec + sigma[np.ix_(idx, rest)] @ model.gamma[rest]
    var = 1.0 + model.linear_variance()
    dens = math.exp(-0.5 * model.gamma0**2 / var) / math.sqrt(2.0 * math.pi * var)
    return vec * dens


def lsn_mean(lambda0: float, lambda1: Sequence[float]) -> np.ndarray:
    """Mean of the linearly skewed normal with tilt Phi(lambda0 + lambda1' x):
    lambda1 * phi(u) / (sqrt(1 + |lambda1|^2) * Phi(u)), u = lambda0 / sqrt(1 + |lambda1|^2)."""
    lam1 = np.atleast_1d(np.asarray(lambda1, dtype=float))
    if not np.isfinite(lambda0) or not np.isfinite(lam1).all():
        raise ValueError("lsn_mean requires finite inputs")
    s = math.sqrt(1.0 + float(lam1 @ lam1))
    u = lambda0 / s
    if u < -37.0:
        raise ValueError(f"normalizing Phi({u:.3f}) underflows; mean undefined in float64")
    return lam1 * (norm.pdf(u) / (s * norm.cdf(u)))


@dataclass
class PopulationCurve:
    """Single-predictor limits across all p columns, for screening-quality plots."""

    beta_ls: np.ndarray
    beta_ml: np.ndarray
    c1: float


def population_curve(model: TrueModel, working_link: LinkFamily) -> PopulationCurve:
    """Per-predictor limits: beta_ls_j exactly (vectorized through the
    contamination identity) and beta_ml_j via the single-column fixed point."""
    sigma = model.sigma()
    c1 = mixture_integral(model.link, model.gamma0, model.linear_variance())
    beta_ls = (sigma @ model.gamma) / np.diag(sigma) * c1
    beta_ml = np.empty(model.p)
    beta0 = np.empty(model.p)
    for j in range(model.p):
        beta0[j], b, _ = beta_ml_population(model, working_link, (j + 1,))
        beta_ml[j] = b[0]
    return PopulationCurve(beta_ls=beta_ls, beta_ml=beta_ml, c1=c1)
