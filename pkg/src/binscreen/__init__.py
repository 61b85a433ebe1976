"""Marginal screening for high-dimensional binary regression.

Three screening statistics (least-squares slope, logit MLE, probit MLE)
with their population limits under link misspecification, plus the data
generators, GLM fitting, and scripted studies that exercise them.
"""

__version__ = "0.1.0"

from .datagen import (
    BinomialColumns,
    CovarianceSpec,
    Dataset,
    TrueModel,
    build_sigma,
    conditional_pmf,
    feasible,
    gen_response,
    pair_correlation,
    sample_correlated_binomial,
    sample_mvn,
    substream,
)
from .errors import InvariantError, SolverError
from .glm import GlmFit, fit, misclassification_rate
from .links import LinkFamily, link_cdf, link_density, mixture_integral, population_mean
from .screening import ScreeningReport, less_stat, screen, selection_size, sis_stat

__all__ = [
    "__version__",
    "BinomialColumns",
    "CovarianceSpec",
    "Dataset",
    "GlmFit",
    "InvariantError",
    "LinkFamily",
    "ScreeningReport",
    "SolverError",
    "TrueModel",
    "build_sigma",
    "conditional_pmf",
    "feasible",
    "fit",
    "gen_response",
    "less_stat",
    "pair_correlation",
    "link_cdf",
    "link_density",
    "misclassification_rate",
    "mixture_integral",
    "population_mean",
    "sample_correlated_binomial",
    "sample_mvn",
    "screen",
    "selection_size",
    "sis_stat",
    "substream",
]
