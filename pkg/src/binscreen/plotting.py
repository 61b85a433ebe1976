"""Figure rendering for the scripted studies.

Every renderer takes a result object from experiments plus an output path
and writes a PNG; the CLI calls these right after the CSV writers so each
study leaves a picture next to its table.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["plot_table1", "plot_table2", "plot_figure1"]

_METHOD_STYLE = {
    "sisl": dict(color="tab:blue", marker="o"),
    "sisp": dict(color="tab:orange", marker="s"),
    "less": dict(color="tab:green", marker="^"),
}


def plot_table1(result, path: str | Path) -> Path:
    """Bias of the adjusted least-squares estimates, one panel per cell,
    with 2 s.e. bars around each coefficient."""
    fig, axes = plt.subplots(2, 2, figsize=(9, 6), sharex=True, sharey=True)
    ks = np.arange(1, result.gamma.size + 1)
    for ax, cell in zip(axes.ravel(), result.cells):
        ax.axhline(0.0, color="gray", lw=0.8)
        ax.errorbar(ks, cell.bias, yerr=2 * cell.se, fmt="o", capsize=3, color="tab:blue")
        ax.set_title(f"{cell.cov.upper()} / {cell.link} (c1={cell.c1:.3f})")
        ax.set_xticks(ks)
    for ax in axes[1]:
        ax.set_xlabel("coefficient")
    for ax in axes[:, 0]:
        ax.set_ylabel("bias of adjusted estimate")
    fig.suptitle(f"Adjusted least-squares bias (n={result.n}, {result.config.replicates} replicates)")
    fig.tight_layout()
    return _save(fig, path)


def plot_table2(result, path: str | Path) -> Path:
    """All-active selection rates against sample size, one panel per
    predictor design."""
    n_values = sorted(result.d_values)
    fig, axes = plt.subplots(1, 3, figsize=(11, 3.6), sharey=True)
    for ax, scenario in zip(axes, ("ar1", "cs", "binom")):
        for method, style in _METHOD_STYLE.items():
            rates = [result.rates[(method, scenario, n)] for n in n_values]
            ax.plot(n_values, rates, label=method.upper(), **style)
        ax.set_title(scenario)
        ax.set_xlabel("n")
        ax.set_xticks(n_values)
        ax.set_ylim(-0.05, 1.05)
    axes[0].set_ylabel("rate of keeping all active predictors")
    axes[0].legend(loc="upper left", frameon=False)
    fig.tight_layout()
    return _save(fig, path)


def plot_figure1(result, path: str | Path) -> Path:
    """Averaged screening statistics over the analytic population curves,
    dotted vertical lines marking the active predictors."""
    fig, axes = plt.subplots(1, len(result.panels), figsize=(11, 4.2), sharey=True)
    idx = np.arange(1, result.p + 1)
    for ax, panel in zip(np.atleast_1d(axes), result.panels):
        for j in result.active:
            ax.axvline(j, color="gray", ls=":", lw=0.9)
        ax.axhline(0.0, color="gray", lw=0.6)
        ax.plot(idx, panel.curve.beta_ls, color="tab:green", lw=1.2, label="LS limit")
        ax.plot(idx, panel.curve.beta_ml, color="tab:orange", lw=1.2, ls="--", label="ML limit")
        ax.errorbar(
            idx, panel.less_mean, yerr=2 * panel.less_se,
            fmt="^", ms=4, color="tab:green", lw=0.8, label="mean LeSS stat",
        )
        ax.errorbar(
            idx, panel.ml_mean, yerr=2 * panel.ml_se,
            fmt="o", ms=4, color="tab:orange", lw=0.8, label="mean probit MLE stat",
        )
        ax.set_title(panel.cov.upper())
        ax.set_xlabel("predictor index")
    np.atleast_1d(axes)[0].set_ylabel("screening statistic")
    np.atleast_1d(axes)[0].legend(loc="lower right", frameon=False, fontsize=8)
    fig.suptitle(f"Screening statistics, n={result.n}, {result.config.replicates} replicates")
    fig.tight_layout()
    return _save(fig, path)


def _save(fig, path: str | Path) -> Path:
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
