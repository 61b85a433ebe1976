"""Seeded simulation studies: the adjusted-bias table, the selection-rate
table, and the per-predictor screening-statistic curves.

Each runner draws its replicates from substreams of one root seed, so a
config plus seed pins the output bit for bit, and cells could in principle
run concurrently without changing anything.  Results come back as plain
dataclasses; CSV/JSON rendering lives in dataio.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from itertools import product

import numpy as np

from .asymptotics import PopulationCurve, population_curve
from .datagen import (
    CovarianceSpec,
    Dataset,
    TrueModel,
    gen_response,
    sample_correlated_binomial,
    sample_mvn,
    substream,
)
from .links import LinkFamily, mixture_integral
from .screening import METHODS, screen, selection_size

__all__ = [
    "ExperimentConfig",
    "Table1Cell",
    "Table1Result",
    "Table2Result",
    "Figure1Panel",
    "Figure1Result",
    "run_table1",
    "run_table2",
    "run_figure1",
]

SCENARIOS = ("ar1", "cs", "binom")

# stream tags keeping the three studies' substreams disjoint
_STREAM = {"table1": 1, "table2": 2, "figure1": 3}


@dataclass(frozen=True)
class ExperimentConfig:
    """Shared knobs for the three studies."""

    scenario: str
    replicates: int = 100
    n_values: tuple[int, ...] = ()
    seed: int = 0
    rho: float = 0.5

    def __post_init__(self) -> None:
        if self.scenario not in _STREAM:
            raise ValueError(f"scenario must be one of {sorted(_STREAM)}, got {self.scenario!r}")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if any(n < 10 for n in self.n_values):
            raise ValueError("every sample size must be >= 10")
        if not 0.0 <= self.rho < 1.0:
            raise ValueError("rho must lie in [0, 1)")


def _rate_gamma(p: int, rho: float) -> np.ndarray:
    """Active set {1, 2, 10, 15} with slopes (1, 1, 1, -3*rho)."""
    if p < 15:
        raise ValueError(f"p must be >= 15 to hold the active set, got {p}")
    gamma = np.zeros(p)
    gamma[[0, 1, 9]] = 1.0
    gamma[14] = -3.0 * rho
    return gamma


# ---------------------------------------------------------------------------
# adjusted least-squares bias (four covariance x link cells)
# ---------------------------------------------------------------------------

TABLE1_GAMMA = np.array([1.0, 1.0, -2.0, 0.0, 0.0])


@dataclass
class Table1Cell:
    cov: str
    link: str
    c1: float
    mean: np.ndarray
    bias: np.ndarray
    se: np.ndarray
    estimates: np.ndarray


@dataclass
class Table1Result:
    config: ExperimentConfig
    n: int
    gamma: np.ndarray
    cells: list[Table1Cell]
    elapsed: float


def run_table1(cfg: ExperimentConfig) -> Table1Result:
    """Mean bias and s.e. of the c1-adjusted full least-squares fit.

    Per cell: draw (X, y) from the five-predictor model, regress y on
    [1, X], divide the slopes by the cell's c1, and accumulate.  The bias
    of the adjusted estimate should be statistically zero everywhere.
    """
    n = cfg.n_values[0] if cfg.n_values else 200
    p = TABLE1_GAMMA.size
    start = time.perf_counter()
    cells = []
    grid = list(product(("ar1", "cs"), (LinkFamily.probit(), LinkFamily.logit())))
    for cell_id, (cov_kind, link) in enumerate(grid):
        cov = CovarianceSpec.ar1(cfg.rho) if cov_kind == "ar1" else CovarianceSpec.cs(cfg.rho)
        model = TrueModel(0.0, TABLE1_GAMMA, link, cov)
        c1 = mixture_integral(link, model.gamma0, model.linear_variance())
        estimates = np.empty((cfg.replicates, p))
        for rep in range(cfg.replicates):
            X = sample_mvn(cov, p, n, 0, rng=substream(cfg.seed, _STREAM["table1"], cell_id, rep, 0))
            y = gen_response(X, model, 0, rng=substream(cfg.seed, _STREAM["table1"], cell_id, rep, 1))
            design = np.column_stack([np.ones(n), X])
            coef, *_ = np.linalg.lstsq(design, y.astype(float), rcond=None)
            estimates[rep] = coef[1:] / c1
        mean = estimates.mean(axis=0)
        cells.append(
            Table1Cell(
                cov=cov_kind,
                link=link.name,
                c1=c1,
                mean=mean,
                bias=mean - TABLE1_GAMMA,
                se=estimates.std(axis=0, ddof=1) / np.sqrt(cfg.replicates),
                estimates=estimates,
            )
        )
    return Table1Result(
        config=cfg,
        n=n,
        gamma=TABLE1_GAMMA.copy(),
        cells=cells,
        elapsed=time.perf_counter() - start,
    )


# ---------------------------------------------------------------------------
# all-active selection rates (three scenarios x three sample sizes)
# ---------------------------------------------------------------------------

RATE_ACTIVE = (1, 2, 10, 15)


@dataclass
class Table2Result:
    config: ExperimentConfig
    p: int
    rates: dict[tuple[str, str, int], float]
    detail: list[dict]
    d_values: dict[int, int]
    elapsed: float


def run_table2(cfg: ExperimentConfig, *, p: int = 1000, threads: int | None = None) -> Table2Result:
    """Fraction of replicates whose selected set keeps every active predictor.

    The same replicate dataset feeds all three methods, so the rows of the
    resulting table differ only through the statistics, not the draws.
    The probit model drives the response in every scenario; the binomial
    scenario swaps the design for sequentially correlated Bin(2, q) columns.
    """
    n_values = cfg.n_values if cfg.n_values else (100, 200, 500)
    gamma = _rate_gamma(p, cfg.rho)
    probit = LinkFamily.probit()
    active = set(RATE_ACTIVE)
    start = time.perf_counter()

    covs = {"ar1": CovarianceSpec.ar1(cfg.rho), "cs": CovarianceSpec.cs(cfg.rho)}
    models = {kind: TrueModel(0.0, gamma, probit, cov) for kind, cov in covs.items()}
    response_model = models["ar1"]  # the binomial design reuses the same slopes and link

    hits = {key: 0 for key in product(METHODS, SCENARIOS, n_values)}
    detail: list[dict] = []
    for (sc_id, scenario), n in product(enumerate(SCENARIOS), n_values):
        d = selection_size(n)
        for rep in range(cfg.replicates):
            x_rng = substream(cfg.seed, _STREAM["table2"], sc_id, n, rep, 0)
            y_rng = substream(cfg.seed, _STREAM["table2"], sc_id, n, rep, 1)
            if scenario == "binom":
                X = sample_correlated_binomial(p, n, 0, rng=x_rng).X.astype(float)
                y = gen_response(X, response_model, 0, rng=y_rng)
            else:
                X = sample_mvn(covs[scenario], p, n, 0, rng=x_rng)
                y = gen_response(X, models[scenario], 0, rng=y_rng)
            data = Dataset(X=X, y=y)
            rep_hits = {}
            for method in METHODS:
                report = screen(data, method, d=d, threads=threads)
                rep_hits[method] = active <= set(report.selected)
                if rep_hits[method]:
                    hits[(method, scenario, n)] += 1
            detail.append({"scenario": scenario, "n": n, "replicate": rep, "hits": rep_hits})

    rates = {key: count / cfg.replicates for key, count in hits.items()}
    return Table2Result(
        config=cfg,
        p=p,
        rates=rates,
        detail=detail,
        d_values={n: selection_size(n) for n in n_values},
        elapsed=time.perf_counter() - start,
    )


# ---------------------------------------------------------------------------
# averaged screening statistics against the analytic limits
# ---------------------------------------------------------------------------


@dataclass
class Figure1Panel:
    cov: str
    curve: PopulationCurve
    less_mean: np.ndarray
    less_se: np.ndarray
    ml_mean: np.ndarray
    ml_se: np.ndarray


@dataclass
class Figure1Result:
    config: ExperimentConfig
    p: int
    n: int
    active: tuple[int, ...]
    panels: list[Figure1Panel]
    elapsed: float


def run_figure1(cfg: ExperimentConfig, *, p: int = 30) -> Figure1Result:
    """Average the per-predictor LeSS and probit-MLE statistics over
    replicates and pair them with the analytic population curves."""
    n = cfg.n_values[0] if cfg.n_values else 200
    gamma = _rate_gamma(p, cfg.rho)
    probit = LinkFamily.probit()
    start = time.perf_counter()

    panels = []
    for panel_id, cov_kind in enumerate(("ar1", "cs")):
        cov = CovarianceSpec.ar1(cfg.rho) if cov_kind == "ar1" else CovarianceSpec.cs(cfg.rho)
        model = TrueModel(0.0, gamma, probit, cov)
        curve = population_curve(model, probit)
        less = np.empty((cfg.replicates, p))
        ml = np.empty((cfg.replicates, p))
        for rep in range(cfg.replicates):
            X = sample_mvn(cov, p, n, 0, rng=substream(cfg.seed, _STREAM["figure1"], panel_id, rep, 0))
            y = gen_response(X, model, 0, rng=substream(cfg.seed, _STREAM["figure1"], panel_id, rep, 1))
            data = Dataset(X=X, y=y)
            less[rep] = screen(data, "less").stats
            ml[rep] = screen(data, "sisp").stats
        scale = np.sqrt(cfg.replicates)
        panels.append(
            Figure1Panel(
                cov=cov_kind,
                curve=curve,
                less_mean=less.mean(axis=0),
                less_se=less.std(axis=0, ddof=1) / scale,
                ml_mean=ml.mean(axis=0),
                ml_se=ml.std(axis=0, ddof=1) / scale,
            )
        )
    return Figure1Result(
        config=cfg,
        p=p,
        n=n,
        active=RATE_ACTIVE,
        panels=panels,
        elapsed=time.perf_counter() - start,
    )
