"""Acceptance gate: one test per release criterion, in order.

`pytest tests/test_acceptance.py -v` prints one pass/fail line per
criterion.  Every tolerance below is frozen; none of them may be loosened
to make a run pass.  Criterion 3 is currently red on the
correlated-binomial design at n=100 and n=200: the implemented generator
recovers the active set far more often than the frozen reference rates
allow.  The analysis lives in the repository decision notes; the targets
stay pinned here on purpose.
"""

from __future__ import annotations

import math
import time

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.optimize import minimize
from scipy.special import log_ndtr
from scipy.stats import norm

from binscreen import (
    CovarianceSpec,
    Dataset,
    LinkFamily,
    TrueModel,
    conditional_pmf,
    feasible,
    fit,
    gen_response,
    mixture_integral,
    sample_correlated_binomial,
    sample_mvn,
    screen,
    selection_size,
    sis_stat,
    substream,
)
from binscreen.asymptotics import population_limits, probit_cross_moment
from binscreen.experiments import ExperimentConfig, run_table1, run_table2
from binscreen.glm import fit_design

ACCEPT_SEED = 0

PROBIT = LinkFamily.probit()
LOGIT = LinkFamily.logit()


def test_c01_attenuation_constants():
    start = time.perf_counter()
    probit_ar1 = mixture_integral(PROBIT, 0.0, 4.0)
    probit_cs = mixture_integral(PROBIT, 0.0, 3.0)
    logit_ar1 = mixture_integral(LOGIT, 0.0, 4.0)
    logit_cs = mixture_integral(LOGIT, 0.0, 3.0)
    elapsed = time.perf_counter() - start

    assert abs(probit_ar1 - 0.178) <= 1e-3
    assert abs(probit_cs - 0.199) <= 1e-3
    assert_allclose(probit_ar1, 1.0 / math.sqrt(2.0 * math.pi * 5.0), rtol=0, atol=1e-9)
    assert_allclose(probit_cs, 1.0 / math.sqrt(2.0 * math.pi * 4.0), rtol=0, atol=1e-9)
    assert abs(logit_ar1 - 0.151) <= 5e-3
    assert abs(logit_cs - 0.164) <= 5e-3
    assert elapsed < 1.0


def test_c02_adjusted_least_squares_is_unbiased():
    start = time.perf_counter()
    result = run_table1(ExperimentConfig("table1", replicates=100, seed=ACCEPT_SEED))
    elapsed = time.perf_counter() - start

    assert result.n == 200
    for cell in result.cells:
        label = f"{cell.cov}/{cell.link}"
        assert (cell.se <= 0.06).all(), (label, cell.se)
        assert (np.abs(cell.bias) < 3.0 * cell.se).all(), (label, cell.bias, cell.se)
    assert elapsed < 60.0


def test_c03_active_set_recovery_rates():
    ar1_target = {100: 0.63, 200: 0.97, 500: 1.00}
    binom_target = {
        "sisl": {100: 0.16, 200: 0.76, 500: 1.00},
        "sisp": {100: 0.16, 200: 0.73, 500: 1.00},
        "less": {100: 0.08, 200: 0.64, 500: 1.00},
    }

    start = time.perf_counter()
    result = run_table2(ExperimentConfig("table2", replicates=100, seed=ACCEPT_SEED), p=1000)
    elapsed = time.perf_counter() - start

    violations = []
    for method in ("sisl", "sisp", "less"):
        for n in (100, 200, 500):
            ar1 = result.rates[(method, "ar1", n)]
            if abs(ar1 - ar1_target[n]) > 0.08:
                violations.append(f"ar1 {method} n={n}: {ar1:.2f} vs {ar1_target[n]:.2f} +/- 0.08")
            cs = result.rates[(method, "cs", n)]
            cs_cap = 0.05 if n == 500 else 0.03
            if cs > cs_cap:
                violations.append(f"cs {method} n={n}: {cs:.2f} vs <= {cs_cap:.2f}")
            binom = result.rates[(method, "binom", n)]
            if abs(binom - binom_target[method][n]) > 0.10:
                violations.append(
                    f"binom {method} n={n}: {binom:.2f} vs {binom_target[method][n]:.2f} +/- 0.10"
                )
            if n == 500 and binom < 0.97:
                violations.append(f"binom {method} n=500: {binom:.2f} vs >= 0.97")
    assert elapsed < 600.0
    assert not violations, "rate targets missed:\n" + "\n".join(violations)


def test_c04_compound_symmetry_cancels_column_15_exactly():
    gamma = np.zeros(30)
    gamma[[0, 1, 9]] = 1.0
    gamma[14] = -1.5
    model = TrueModel(0.0, gamma, PROBIT, CovarianceSpec.cs(0.5))
    from binscreen.asymptotics import beta_ls_population

    beta, _ = beta_ls_population(model, (15,))
    assert abs(beta[0]) <= 1e-12


def _random_limit_model(rng):
    p = int(rng.integers(4, 9))
    k = int(rng.integers(2, 5))
    idx = rng.choice(p, size=min(k, p), replace=False)
    gamma = np.zeros(p)
    gamma[idx] = rng.uniform(0.4, 1.2, size=idx.size) * rng.choice([-1.0, 1.0], size=idx.size)
    rho = float(rng.uniform(0.2, 0.6))
    cov = CovarianceSpec.ar1(rho) if rng.uniform() < 0.5 else CovarianceSpec.cs(rho)
    link = PROBIT if rng.uniform() < 0.5 else LOGIT
    gamma0 = float(rng.uniform(-0.4, 0.4))
    subset = sorted(int(j) + 1 for j in idx)
    return TrueModel(gamma0, gamma, link, cov), tuple(subset)


def test_c05_ml_limits_match_large_sample_fits():
    rng = substream(ACCEPT_SEED, 50)
    for i in range(10):
        model, subset = _random_limit_model(rng)
        working = PROBIT if rng.uniform() < 0.5 else LOGIT
        limits = population_limits(model, working, subset)

        assert_allclose(limits.beta_ml * limits.c2, limits.beta_ls, rtol=0, atol=1e-8)
        cos = limits.beta_ml @ limits.beta_ls / (
            np.linalg.norm(limits.beta_ml) * np.linalg.norm(limits.beta_ls)
        )
        assert cos >= 1.0 - 1e-8

        n = 100_000
        X = sample_mvn(model.cov, model.p, n, 0, rng=substream(ACCEPT_SEED, 51, i, 0))
        y = gen_response(X, model, 0, rng=substream(ACCEPT_SEED, 51, i, 1))
        cols = [j - 1 for j in subset]
        fitted = fit(X[:, cols], y, working)
        assert fitted.converged, f"model {i}: large-sample fit did not converge"
        assert abs(fitted.coefficients[0] - limits.beta0_ml) < 0.05
        assert np.max(np.abs(fitted.coefficients[1:] - limits.beta_ml)) < 0.05, f"model {i}"


def test_c06_probit_cross_moment_matches_monte_carlo():
    rng = substream(ACCEPT_SEED, 60)
    n = 1_000_000
    for i in range(10):
        p = int(rng.integers(3, 7))
        gamma = rng.uniform(-1.0, 1.0, size=p)
        gamma[0] = rng.uniform(0.3, 1.0) * (1 if rng.uniform() < 0.5 else -1)
        rho = float(rng.uniform(0.1, 0.6))
        cov = CovarianceSpec.ar1(rho) if rng.uniform() < 0.5 else CovarianceSpec.cs(rho)
        model = TrueModel(float(rng.uniform(-0.5, 0.5)), gamma, PROBIT, cov)

        closed = probit_cross_moment(model, (1,))[0]
        X = sample_mvn(cov, p, n, 0, rng=substream(ACCEPT_SEED, 61, i, 0))
        y = gen_response(X, model, 0, rng=substream(ACCEPT_SEED, 61, i, 1))
        prod = X[:, 0] * y
        mc = prod.mean()
        se = prod.std(ddof=1) / math.sqrt(n)
        assert abs(mc - closed) <= 3.0 * se, f"model {i}: {mc} vs {closed} (se {se})"


def test_c07_selection_sizes():
    assert selection_size(100) == 21
    assert selection_size(200) == 37
    assert selection_size(500) == 80
    assert selection_size(72) == 16


def _reference_mle(Z, y, link_name):
    def value_and_grad(beta):
        eta = Z @ beta
        if link_name == "logit":
            ll = float(y @ eta - np.logaddexp(0.0, eta).sum())
            grad = Z.T @ (y - 1.0 / (1.0 + np.exp(-eta)))
        else:
            chosen = np.where(y == 1, log_ndtr(eta), log_ndtr(-eta))
            ll = float(chosen.sum())
            ratio = np.exp(norm.logpdf(eta) - chosen)
            grad = Z.T @ np.where(y == 1, ratio, -ratio)
        return -ll, -grad

    res = minimize(
        value_and_grad,
        np.zeros(Z.shape[1]),
        jac=True,
        method="BFGS",
        options={"gtol": 1e-12, "maxiter": 500},
    )
    return res.x


def test_c08_fits_match_reference_optimizer_and_ll_is_monotone():
    rng = substream(ACCEPT_SEED, 80)
    compared = 0
    for i in range(100):
        n = int(rng.integers(40, 90))
        link_name = "logit" if i % 2 == 0 else "probit"
        link = LinkFamily.from_name(link_name)
        x = rng.standard_normal(n)
        w = rng.standard_normal((n, 2))
        eta = 0.3 * x + w @ rng.uniform(-0.8, 0.8, size=2) + rng.uniform(-0.3, 0.3)
        y = (rng.uniform(size=n) < link.cdf(eta)).astype(int)
        if y.min() == y.max():
            continue

        single = fit(x, y, link)
        multi = fit(np.column_stack([x, w]), y, link)
        if single.separation_detected or multi.separation_detected:
            continue

        Z1 = np.column_stack([np.ones(n), x])
        assert_allclose(single.coefficients, _reference_mle(Z1, y, link_name), rtol=0, atol=1e-6)
        assert_allclose(sis_stat(x, y, link), single.coefficients[1], rtol=0, atol=1e-8)
        Z3 = np.column_stack([np.ones(n), x, w])
        assert_allclose(multi.coefficients, _reference_mle(Z3, y, link_name), rtol=0, atol=1e-6)

        lls = [fit_design(Z3, y, link, max_iter=k).log_likelihood for k in range(1, 9)]
        assert (np.diff(lls) >= -1e-13).all(), f"dataset {i}: log-likelihood decreased"
        compared += 1
    assert compared >= 90, f"only {compared} clean datasets out of 100"


def test_c09_wide_screening_wall_time():
    n, p = 72, 7128
    gamma = np.zeros(p)
    gamma[[0, 1, 9, 14]] = (1.0, 1.0, 1.0, -1.5)
    model = TrueModel(0.0, gamma, PROBIT, CovarianceSpec.ar1(0.3))
    X = sample_mvn(model.cov, p, n, 0, rng=substream(ACCEPT_SEED, 90, 0))
    y = gen_response(X, model, 0, rng=substream(ACCEPT_SEED, 90, 1))
    data = Dataset(X=X, y=y)
    assert 0 < y.sum() < n

    start = time.perf_counter()
    less = screen(data, "less")
    less_time = time.perf_counter() - start
    assert less.d == 16
    assert less_time < 1.0, f"least-squares screen took {less_time:.2f}s"

    for method in ("sisl", "sisp"):
        start = time.perf_counter()
        report = screen(data, method, threads=1)
        wall = time.perf_counter() - start
        assert len(report.selected) == 16
        assert wall < 60.0, f"{method} screen took {wall:.1f}s"


def test_c10_binomial_chain_distributional_checks():
    rng = substream(ACCEPT_SEED, 100)
    checked = 0
    while checked < 10_000:
        q1, q2 = rng.uniform(0.1, 0.5, size=2)
        alpha = rng.uniform(0.5, 1.0)
        if not feasible(q1, q2, alpha):
            continue
        rows = conditional_pmf(q1, q2, alpha)
        assert_allclose(rows.sum(axis=1), np.ones(3), rtol=0, atol=1e-12)
        assert (rows >= 0.0).all()
        checked += 1

    cols = sample_correlated_binomial(100_000, 2, ACCEPT_SEED)
    corr = cols.consecutive_correlations()
    median = float(np.median(corr))
    forced = float(np.mean(cols.alpha[1:] == 0.0))
    assert abs(median - 0.4) <= 0.05, f"median consecutive correlation {median:.4f}"
    assert abs(forced - 0.10) <= 0.03, f"independence fraction {forced:.4f}"
