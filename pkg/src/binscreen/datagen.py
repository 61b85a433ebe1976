"""Synthetic data generation for screening experiments.

Covers the three predictor designs used throughout: multivariate normal
draws under AR1 / compound-symmetry / explicit covariance, Bernoulli
responses from a specified true model, and the sequentially correlated
Binomial(2, q) predictors built from a conditional-pmf construction.

All generators are deterministic functions of (spec, seed).  Substreams
for replicate r of experiment e come from ``substream(seed, e, r)``, a
counter-based generator keyed by the full path, so parallel replicates
reproduce identically regardless of scheduling.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import InvariantError
from .links import LinkFamily

__all__ = [
    "CovarianceSpec",
    "TrueModel",
    "Dataset",
    "BinomialColumns",
    "substream",
    "build_sigma",
    "sample_mvn",
    "gen_response",
    "pair_correlation",
    "sample_correlated_binomial",
]


def substream(seed: int, *path: int) -> np.random.Generator:
    """Independent RNG substream for the given (seed, path) pair.

    Philox is counter-based; the path ints are folded into the seed
    material, so ``substream(s, e, r)`` is reproducible on its own and
    statistically independent across distinct paths.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in path))
    return np.random.Generator(np.random.Philox(ss))


# ---------------------------------------------------------------------------
# Covariance structures
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CovarianceSpec:
    """AR1(rho), CS(rho), or an explicit SPD matrix.

    AR1 entries are rho^|i-j|; CS entries are 1 on the diagonal and rho off
    it.  The one-factor CS sampler needs rho >= 0; negative exchangeable
    correlation has to go through an explicit Dense matrix.
    """

    kind: str  # "ar1" | "cs" | "dense"
    rho: Optional[float] = None
    matrix: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind == "ar1":
            if self.rho is None or not -1.0 < self.rho < 1.0:
                raise ValueError(f"AR1 requires rho in (-1, 1), got {self.rho}")
        elif self.kind == "cs":
            if self.rho is None or not 0.0 <= self.rho < 1.0:
                raise ValueError(f"CS requires rho in [0, 1), got {self.rho}")
        elif self.kind == "dense":
            m = np.asarray(self.matrix, dtype=float)
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise ValueError("dense covariance must be a square matrix")
            if not np.allclose(m, m.T, atol=1e-12):
                raise ValueError("dense covariance must be symmetric")
            try:
                np.linalg.cholesky(m)
            except np.linalg.LinAlgError:
                raise ValueError("dense covariance is not positive definite") from None
            object.__setattr__(self, "matrix", m)
        else:
            raise ValueError(f"unknown covariance kind {self.kind!r}")

    @classmethod
    def ar1(cls, rho: float) -> "CovarianceSpec":
        return cls("ar1", rho=float(rho))

    @classmethod
    def cs(cls, rho: float) -> "CovarianceSpec":
        return cls("cs", rho=float(rho))

    @classmethod
    def dense(cls, matrix) -> "CovarianceSpec":
        return cls("dense", matrix=np.asarray(matrix, dtype=float))

    @property
    def dimension(self) -> Optional[int]:
        """Fixed dimension for dense matrices, None for parametric kinds."""
        return None if self.matrix is None else self.matrix.shape[0]


def build_sigma(spec: CovarianceSpec, p: int) -> np.ndarray:
    """Materialize the p x p covariance matrix for a `CovarianceSpec`."""
    if p < 1:
        raise ValueError("p must be >= 1")
    if spec.kind == "ar1":
        idx = np.arange(p)
        return spec.rho ** np.abs(idx[:, None] - idx[None, :])
    if spec.kind == "cs":
        sigma = np.full((p, p), spec.rho)
        np.fill_diagonal(sigma, 1.0)
        return sigma
    if spec.matrix.shape[0] != p:
        raise ValueError(f"dense covariance is {spec.matrix.shape[0]}x{spec.matrix.shape[0]}, requested p={p}")
    return spec.matrix.copy()


def sample_mvn(spec: CovarianceSpec, p: int, n: int, seed: int, *, rng=None) -> np.ndarray:
    """n iid rows from Normal(0, Sigma) under the given structure.

    AR1 runs the stationary recursion X_j = rho X_{j-1} + sqrt(1-rho^2) e_j,
    CS shares one common factor across columns, and dense covariances go
    through a Cholesky factor.  Passing ``rng`` overrides the seed (used by
    the experiment harness to keep one substream per replicate).
    """
    if n < 1 or p < 1:
        raise ValueError("n and p must be >= 1")
    if rng is None:
        rng = substream(seed)
    if spec.kind == "ar1":
        eps = rng.standard_normal((n, p))
        X = np.empty((n, p))
        X[:, 0] = eps[:, 0]
        scale = np.sqrt(1.0 - spec.rho**2)
        for j in range(1, p):
            X[:, j] = spec.rho * X[:, j - 1] + scale * eps[:, j]
        return X
    if spec.kind == "cs":
        z0 = rng.standard_normal((n, 1))
        eps = rng.standard_normal((n, p))
        return np.sqrt(spec.rho) * z0 + np.sqrt(1.0 - spec.rho) * eps
    L = np.linalg.cholesky(build_sigma(spec, p))
    return rng.standard_normal((n, p)) @ L.T


# ---------------------------------------------------------------------------
# True model and datasets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrueModel:
    """The data-generating Bernoulli regression: pi = H(gamma0 + x' gamma)."""

    gamma0: float
    gamma: np.ndarray
    link: LinkFamily
    cov: CovarianceSpec

    def __post_init__(self):
        g = np.atleast_1d(np.asarray(self.gamma, dtype=float))
        if g.ndim != 1 or g.size == 0:
            raise ValueError("gamma must be a nonempty vector")
        if not np.any(g != 0.0):
            raise ValueError("gamma must have at least one nonzero entry")
        d = self.cov.dimension
        if d is not None and d != g.size:
            raise ValueError(f"gamma has length {g.size} but covariance is {d}x{d}")
        object.__setattr__(self, "gamma", g)
        object.__setattr__(self, "gamma0", float(self.gamma0))

    @property
    def p(self) -> int:
        return self.gamma.size

    def sigma(self) -> np.ndarray:
        return build_sigma(self.cov, self.p)

    def linear_variance(self) -> float:
        """gamma' Sigma gamma, the variance of the linear predictor."""
        return float(self.gamma @ self.sigma() @ self.gamma)


@dataclass
class Dataset:
    """Predictor matrix plus binary response, with names for reporting."""

    X: np.ndarray
    y: np.ndarray
    names: tuple[str, ...] = ()
    response_name: str = "y"

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        self.y = np.asarray(self.y)
        if self.X.ndim != 2:
            raise ValueError("X must be a 2-d matrix")
        n, p = self.X.shape
        if n < 2:
            raise ValueError("need at least 2 rows")
        if self.y.shape != (n,):
            raise ValueError(f"y has shape {self.y.shape}, expected ({n},)")
        if not np.isfinite(self.X).all():
            raise ValueError("X contains non-finite entries")
        if not np.isin(self.y, (0, 1)).all():
            raise ValueError("y must contain only 0/1 values")
        self.y = self.y.astype(np.int8)
        if not self.names:
            self.names = tuple(f"x{j}" for j in range(1, p + 1))
        elif len(self.names) != p:
            raise ValueError("names length does not match number of columns")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]


def gen_response(X: np.ndarray, model: TrueModel, seed: int, *, rng=None) -> np.ndarray:
    """Bernoulli responses y_i ~ Ber(H(gamma0 + x_i' gamma))."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != model.p:
        raise ValueError(f"X has {X.shape[1] if X.ndim == 2 else '?'} columns, model expects {model.p}")
    if rng is None:
        rng = substream(seed)
    pi = model.link.cdf(model.gamma0 + X @ model.gamma)
    return (rng.uniform(size=X.shape[0]) < pi).astype(np.int8)


# ---------------------------------------------------------------------------
# Correlated Binomial(2, q) predictors
# ---------------------------------------------------------------------------


def pair_correlation(p1: float, p2: float, alpha: float) -> float:
    """Correlation between consecutive columns implied by (p1, p2, alpha)."""
    for name, p in (("p1", p1), ("p2", p2)):
        if not 0.0 < p < 1.0:
            raise ValueError(f"{name} must be in (0, 1), got {p}")
    if alpha < 0.0:
        raise ValueError(f"alpha must be nonnegative, got {alpha}")
    return alpha / (1.0 + alpha) * np.sqrt(p1 * (1.0 - p1) / (p2 * (1.0 - p2)))


def feasible(p1: float, p2: float, alpha: float) -> bool:
    """Whether (p1, p2, alpha) yields valid conditional pmfs."""
    lo = alpha / (1.0 + alpha) * p1
    return lo <= p2 <= lo + 1.0 / (1.0 + alpha)


def conditional_pmf(p1: float, p2: float, alpha: float) -> np.ndarray:
    """3x3 matrix: row x1 in {0,1,2} -> pmf of x2 over {0,1,2}.

    Built from the tilted probabilities pt1 = [p2 + a(p2-p1)]/(1+a) and
    pt2 = pt1 + a/(1+a); each row sums to 1 identically when the
    feasibility condition holds.
    """
    pt1 = (p2 + alpha * (p2 - p1)) / (1.0 + alpha)
    pt2 = pt1 + alpha / (1.0 + alpha)
    rows = np.array([
        [(1 - pt1) ** 2, 2 * pt1 * (1 - pt1), pt1**2],
        [(1 - pt1) * (1 - pt2), (1 - pt1) * pt2 + pt1 * (1 - pt2), pt1 * pt2],
        [(1 - pt2) ** 2, 2 * pt2 * (1 - pt2), pt2**2],
    ])
    if np.any(rows < -1e-12) or np.max(np.abs(rows.sum(axis=1) - 1.0)) > 1e-12:
        raise InvariantError(
            f"conditional pmf invalid for p1={p1}, p2={p2}, alpha={alpha}; "
            "feasibility condition mishandled"
        )
    return np.clip(rows, 0.0, 1.0)


@dataclass
class BinomialColumns:
    """Correlated-binomial sample plus the per-column parameters behind it."""

    X: np.ndarray  # (n, p) with entries in {0, 1, 2}
    q: np.ndarray  # (p,) marginal Bin(2, q_j) success probabilities
    alpha: np.ndarray  # (p,) dependence weights; 0 marks a forced-independent column

    def consecutive_correlations(self) -> np.ndarray:
        """Implied correlation of each (j-1, j) column pair, j = 2..p."""
        return np.array([
            pair_correlation(self.q[j - 1], self.q[j], self.alpha[j])
            for j in range(1, len(self.q))
        ])


def sample_correlated_binomial(p: int, n: int, seed: int, *, rng=None) -> BinomialColumns:
    """Sequentially correlated Binomial(2, q_j) predictor columns.

    Column 1 is plain Binomial(2, q_1) with q_1 ~ U(0.1, 0.5).  Each later
    column draws q_j ~ U(0.1, 0.5) and alpha_j ~ U(0.5, 1), resets
    alpha_j = 0 whenever the feasibility condition fails (forcing the pair
    independent), and then samples from the conditional pmf given the
    previous column.  Marginals stay Binomial(2, q_j) throughout.
    """
    if p < 1 or n < 1:
        raise ValueError("p and n must be >= 1")
    if rng is None:
        rng = substream(seed)
    X = np.empty((n, p), dtype=np.int8)
    q = rng.uniform(0.1, 0.5, size=p)
    alpha = rng.uniform(0.5, 1.0, size=p)
    alpha[0] = 0.0
    X[:, 0] = rng.binomial(2, q[0], size=n)
    for j in range(1, p):
        if not feasible(q[j - 1], q[j], alpha[j]):
            alpha[j] = 0.0
        rows = conditional_pmf(q[j - 1], q[j], alpha[j])
        # inverse-cdf on one uniform per row; strict cumulative, no ties
        cum = np.cumsum(rows, axis=1)
        u = rng.uniform(size=n)
        X[:, j] = (u[:, None] > cum[X[:, j - 1]]).sum(axis=1)
    return BinomialColumns(X=X, q=q, alpha=alpha)
