"""Binary-response GLM fitting by iteratively reweighted least squares.

One solver serves two callers: the multivariate post-screening fit (with
misclassification evaluation) and the per-column marginal fits behind the
SIS screening statistics, which call ``fit_design`` directly on a
two-column design.  All likelihood quantities are computed in log space,
so probit fits stay finite far into the tails.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
import scipy.linalg

from .links import LinkFamily

__all__ = ["GlmFit", "COEF_CAP", "fit", "fit_design", "misclassification_rate"]

# Coefficient cap beyond which the MLE is treated as divergent (separation).
COEF_CAP = 30.0


@dataclass
class GlmFit:
    """Result of a binary GLM fit; coefficients carry the intercept first."""

    coefficients: np.ndarray
    converged: bool
    separation_detected: bool
    log_likelihood: float
    iterations: int


def _log_parts(link: LinkFamily, eta: np.ndarray):
    """(log H, log(1-H), log h) at eta."""
    return link.log_cdf(eta), link.log_sf(eta), link.log_pdf(eta)


def fit_design(
    Z: np.ndarray,
    y: np.ndarray,
    link: LinkFamily,
    *,
    tol: float = 1e-8,
    max_iter: int = 100,
    coef_cap: float = COEF_CAP,
) -> GlmFit:
    """IRLS on an explicit design matrix (first column must be the intercept).

    Iterates Fisher-scoring steps with step halving whenever a full step
    would decrease the log-likelihood; both supported links have concave
    log-likelihoods, so halving guarantees monotone ascent.  Stops early
    with ``separation_detected`` when the coefficient norm escapes
    ``coef_cap`` or the log-likelihood climbs to ~0, the Albert-Anderson
    signature of a divergent MLE.
    """
    Z = np.asarray(Z, dtype=float)
    y = np.asarray(y)
    n, q = Z.shape
    is_one = y.astype(bool)
    ybar = float(y.mean())
    if not 0.0 < ybar < 1.0:
        raise ValueError("response must contain both classes")

    beta = np.zeros(q)
    beta[0] = float(link.inverse_cdf(ybar))
    eta = Z @ beta
    lp, lq, lh = _log_parts(link, eta)
    ll = float(np.where(is_one, lp, lq).sum())

    converged = False
    separation = False
    iterations = 0
    for _ in range(max_iter):
        u = np.where(is_one, np.exp(lh - lp), -np.exp(lh - lq))
        score = Z.T @ u
        if np.max(np.abs(score)) < tol:
            converged = True
            break
        w = np.exp(2.0 * lh - lp - lq)
        info = Z.T @ (w[:, None] * Z)
        try:
            step = np.linalg.solve(info, score)
        except np.linalg.LinAlgError:
            break  # information matrix collapsed; report non-convergence
        # step halving keeps the ascent monotone
        for _ in range(40):
            cand = beta + step
            eta_c = Z @ cand
            lp_c, lq_c, lh_c = _log_parts(link, eta_c)
            ll_c = float(np.where(is_one, lp_c, lq_c).sum())
            if ll_c >= ll - 1e-13:
                break
            step *= 0.5
        beta, eta, ll = cand, eta_c, ll_c
        lp, lq, lh = lp_c, lq_c, lh_c
        iterations += 1
        if np.max(np.abs(beta)) > coef_cap or ll > -1e-6:
            separation = True
            break

    return GlmFit(
        coefficients=beta,
        converged=converged,
        separation_detected=separation,
        log_likelihood=ll,
        iterations=iterations,
    )


def _collinear_columns(Z: np.ndarray) -> list[int]:
    """Indices of design columns beyond the pivoted rank (empty if full rank)."""
    _, R, piv = scipy.linalg.qr(Z, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    if diag[0] == 0.0:
        return list(piv)
    rank = int(np.sum(diag > diag[0] * max(Z.shape) * np.finfo(float).eps))
    return sorted(int(j) for j in piv[rank:])


def fit(
    X: np.ndarray,
    y: np.ndarray,
    link: LinkFamily,
    *,
    names: Optional[Sequence[str]] = None,
    tol: float = 1e-8,
    max_iter: int = 100,
) -> GlmFit:
    """Fit y ~ intercept + X under the given link.

    X may have zero columns (intercept-only model, solved at the first
    score evaluation).  A rank-deficient design is rejected up front with
    the offending columns named.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[0] == 1 and len(y) != 1:
        X = X.T
    n = X.shape[0]
    if len(y) != n:
        raise ValueError(f"X has {n} rows but y has {len(y)}")
    Z = np.column_stack([np.ones(n), X])
    bad = _collinear_columns(Z)
    if bad:
        labels = []
        for j in bad:
            if j == 0:
                labels.append("intercept")
            elif names is not None:
                labels.append(str(names[j - 1]))
            else:
                labels.append(f"x{j}")
        raise ValueError(f"design matrix is rank deficient; collinear columns: {', '.join(labels)}")
    return fit_design(Z, y, link, tol=tol, max_iter=max_iter)


def misclassification_rate(fit: GlmFit, X: np.ndarray, y: np.ndarray) -> Fraction:
    """Training-style misclassification rate of the fitted classifier.

    Classifies 1 exactly when the fitted probability is >= 1/2, i.e. when
    the linear predictor is >= 0 (the tie at probability 1/2 goes to class
    1, so no link evaluation is needed).  Returns the exact errors/n ratio.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[0] == 1 and len(y) != 1:
        X = X.T
    beta = fit.coefficients
    if X.shape[1] != beta.size - 1:
        raise ValueError(f"X has {X.shape[1]} columns but fit expects {beta.size - 1}")
    eta = beta[0] + X @ beta[1:]
    yhat = (eta >= 0.0).astype(int)
    errors = int(np.sum(yhat != np.asarray(y)))
    return Fraction(errors, len(y))
