"""Screening statistics and the top-d selection rule.

Three per-predictor statistics are supported:

* ``less``  -- least-squares screening: the simple-regression slope of y
  on the column (centering and inner products only, no matrix inversion).
* ``sisl`` / ``sisp`` -- marginal maximum likelihood under a logit /
  probit working link: the slope of a two-parameter (intercept + slope)
  GLM fit, sharing the IRLS solver with :mod:`binscreen.glm`.

``screen`` applies one statistic to every column, ranks by absolute
value, and keeps the ``d = floor(n / log n)`` largest.  Predictor indices
in reports are 1-based, matching the ``x1..xp`` column naming.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import glm
from .datagen import Dataset
from .links import LinkFamily

__all__ = [
    "METHODS",
    "SEPARATION_CAP",
    "ScreeningReport",
    "less_stat",
    "sis_stat",
    "selection_size",
    "screen",
    "worker_count",
]

METHODS = ("less", "sisl", "sisp")

# Capped value reported for a separating predictor: maximally informative,
# so it should rank first instead of being dropped.
SEPARATION_CAP = glm.COEF_CAP

FLAG_OK = "ok"
FLAG_ZERO_VARIANCE = "zero_variance"
FLAG_SEPARATION = "separation"
FLAG_NONCONVERGENCE = "nonconvergence"

# Flags whose columns stay out of the selected set.  Separation is not
# among them: its capped statistic is meant to top the ranking.
_EXCLUDED_FLAGS = frozenset({FLAG_ZERO_VARIANCE, FLAG_NONCONVERGENCE})


@dataclass
class ScreeningReport:
    """Per-predictor statistics plus the ranked top-d selection.

    ``abs_rank`` lists the 1-based predictor indices from largest to
    smallest |stat| (ties broken by ascending index); ``selected`` holds
    the chosen indices in ascending order.
    """

    method: str
    stats: np.ndarray
    abs_rank: np.ndarray
    selected: tuple[int, ...]
    flags: tuple[str, ...]
    d: int
    timing: float
    names: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "d": self.d,
            "selected": list(self.selected),
            "selected_names": [self.names[j - 1] for j in self.selected] if self.names else [],
            "abs_rank": [int(j) for j in self.abs_rank],
            "stats": [float(s) for s in self.stats],
            "flags": list(self.flags),
            "timing_seconds": self.timing,
        }


def less_stat(x: np.ndarray, y: np.ndarray) -> float:
    """Simple-regression slope of y on x: centered cross-product over
    centered sum of squares."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or x.shape != y.shape or x.size < 2:
        raise ValueError("x and y must be equal-length vectors with n >= 2")
    xc = x - x.mean()
    sxx = float(xc @ xc)
    if sxx == 0.0:
        raise ValueError("x has zero variance")
    return float(xc @ (y - y.mean())) / sxx


def sis_stat(x: np.ndarray, y: np.ndarray, link: LinkFamily) -> float:
    """Marginal-MLE slope of the two-parameter working model on one column.

    Under separation the MLE diverges; the statistic is then reported as
    sign(less_stat) * SEPARATION_CAP so the column still ranks first.
    """
    stat, _ = _sis_stat_flagged(x, y, link)
    return stat


def _sis_stat_flagged(x: np.ndarray, y: np.ndarray, link: LinkFamily) -> tuple[float, str]:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y)
    if x.ndim != 1 or x.shape[0] != y.shape[0] or x.size < 2:
        raise ValueError("x and y must be equal-length vectors with n >= 2")
    xc = x - x.mean()
    sxx = float(xc @ xc)
    if sxx == 0.0:
        return 0.0, FLAG_ZERO_VARIANCE
    ybar = float(np.asarray(y, dtype=float).mean())
    if not 0.0 < ybar < 1.0:
        raise ValueError("response must contain both classes")
    Z = np.column_stack([np.ones_like(x), x])
    result = glm.fit_design(Z, y, link, max_iter=50)
    if result.separation_detected:
        slope_sign = math.copysign(1.0, float(xc @ (np.asarray(y, dtype=float) - ybar)))
        return slope_sign * SEPARATION_CAP, FLAG_SEPARATION
    if not result.converged:
        return float(result.coefficients[1]), FLAG_NONCONVERGENCE
    return float(result.coefficients[1]), FLAG_OK


def selection_size(n: int) -> int:
    """Top-list size d = floor(n / log n)."""
    n = int(n)
    if n < 3:
        raise ValueError(f"selection size requires n >= 3, got {n}")
    return int(math.floor(n / math.log(n)))


def worker_count() -> int:
    """Worker cap for the per-column loop: BINSCREEN_THREADS, else all cores."""
    env = os.environ.get("BINSCREEN_THREADS")
    if env is not None:
        count = int(env)
        if count < 1:
            raise ValueError(f"BINSCREEN_THREADS must be >= 1, got {env}")
        return count
    return os.cpu_count() or 1


def _less_stats_all(X: np.ndarray, y: np.ndarray, sxx: np.ndarray) -> np.ndarray:
    xc = X - X.mean(axis=0)
    yc = np.asarray(y, dtype=float) - float(np.mean(y))
    with np.errstate(divide="ignore", invalid="ignore"):
        stats = (xc.T @ yc) / sxx
    return np.where(sxx > 0.0, stats, 0.0)


def screen(
    data: Dataset,
    method: str,
    link: Optional[LinkFamily] = None,
    *,
    d: Optional[int] = None,
    standardize: bool = False,
    threads: Optional[int] = None,
) -> ScreeningReport:
    """Apply one screening statistic to every column and select the top d.

    Columns are processed independently (the SIS loop fans out over a
    thread pool capped by ``threads`` / BINSCREEN_THREADS) and the report
    is assembled by column index, so the output does not depend on the
    worker count.  Zero-variance and non-converged columns keep their
    flags and stay out of the selection; separating columns enter with the
    capped statistic.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    if method != "less":
        if link is None:
            link = LinkFamily.logit() if method == "sisl" else LinkFamily.probit()
        ybar = float(np.asarray(data.y, dtype=float).mean())
        if not 0.0 < ybar < 1.0:
            raise ValueError("response must contain both classes for SIS screening")

    n, p = data.n, data.p
    if d is None:
        d = selection_size(n)
    if d < 1:
        raise ValueError("d must be >= 1")

    X = data.X
    t0 = time.perf_counter()
    xc_mean = X.mean(axis=0)
    sxx = np.einsum("ij,ij->j", X, X) - n * xc_mean**2
    sxx = np.maximum(sxx, 0.0)
    zero_var = sxx <= n * np.maximum(1.0, xc_mean**2) * np.finfo(float).eps * 16
    if standardize:
        sd = np.sqrt(sxx / (n - 1))
        X = np.where(zero_var, X, (X - xc_mean) / np.where(zero_var, 1.0, sd))
        sxx = np.where(zero_var, 0.0, float(n - 1))

    flags = np.array([FLAG_ZERO_VARIANCE if z else FLAG_OK for z in zero_var], dtype=object)
    if method == "less":
        stats = _less_stats_all(X, data.y, np.where(zero_var, 0.0, sxx))
    else:
        stats = np.zeros(p)
        todo = [j for j in range(p) if not zero_var[j]]

        def run_column(j: int) -> tuple[int, float, str]:
            stat, flag = _sis_stat_flagged(X[:, j], data.y, link)
            return j, stat, flag

        workers = threads if threads is not None else worker_count()
        if workers > 1 and len(todo) > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(run_column, todo))
        else:
            results = [run_column(j) for j in todo]
        for j, stat, flag in results:
            stats[j] = stat
            flags[j] = flag
    elapsed = time.perf_counter() - t0

    # rank by |stat| descending, ties by ascending column index
    order = np.lexsort((np.arange(p), -np.abs(stats)))
    eligible = [j for j in order if flags[j] not in _EXCLUDED_FLAGS]
    if not eligible:
        raise ValueError("no screenable predictors: every column is flagged")
    selected = tuple(sorted(int(j) + 1 for j in eligible[:d]))

    return ScreeningReport(
        method=method,
        stats=stats,
        abs_rank=(order + 1).astype(int),
        selected=selected,
        flags=tuple(flags),
        d=int(d),
        timing=elapsed,
        names=data.names,
    )
