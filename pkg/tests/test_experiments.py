from __future__ import annotations

import numpy as np
import pytest
from numpy.testing import assert_allclose

from binscreen import LinkFamily, mixture_integral
from binscreen.experiments import (
    ExperimentConfig,
    run_figure1,
    run_table1,
    run_table2,
)


def test_config_validation():
    ExperimentConfig("table1")
    with pytest.raises(ValueError, match="scenario"):
        ExperimentConfig("table7")
    with pytest.raises(ValueError, match="replicates"):
        ExperimentConfig("table1", replicates=0)
    with pytest.raises(ValueError, match="sample size"):
        ExperimentConfig("table2", n_values=(100, 5))
    with pytest.raises(ValueError, match="rho"):
        ExperimentConfig("figure1", rho=1.0)


def test_table1_shape_and_attenuation_constants():
    cfg = ExperimentConfig("table1", replicates=25, seed=3)
    result = run_table1(cfg)
    assert result.n == 200
    assert len(result.cells) == 4
    assert [(c.cov, c.link) for c in result.cells] == [
        ("ar1", "probit"),
        ("ar1", "logit"),
        ("cs", "probit"),
        ("cs", "logit"),
    ]
    for cell in result.cells:
        link = LinkFamily.from_name(cell.link)
        v = 4.0 if cell.cov == "ar1" else 3.0
        assert_allclose(cell.c1, mixture_integral(link, 0.0, v), rtol=1e-12)
        assert cell.estimates.shape == (25, 5)
        assert_allclose(cell.bias, cell.mean - result.gamma, rtol=0, atol=0)
        # 25 replicates already pin the adjusted estimates near the truth
        assert np.max(np.abs(cell.bias)) < 0.5
        assert (cell.se > 0).all()


def test_table1_deterministic_in_seed():
    cfg = ExperimentConfig("table1", replicates=5, seed=21)
    a = run_table1(cfg)
    b = run_table1(cfg)
    for ca, cb in zip(a.cells, b.cells):
        assert np.array_equal(ca.estimates, cb.estimates)
    c = run_table1(ExperimentConfig("table1", replicates=5, seed=22))
    assert not np.array_equal(a.cells[0].estimates, c.cells[0].estimates)


def test_table1_honours_n_override():
    cfg = ExperimentConfig("table1", replicates=3, n_values=(120,), seed=1)
    assert run_table1(cfg).n == 120


def test_table2_structure_and_determinism():
    cfg = ExperimentConfig("table2", replicates=4, n_values=(60, 90), seed=8)
    result = run_table2(cfg, p=50)
    assert result.p == 50
    assert result.d_values == {60: 14, 90: 20}
    assert set(result.rates) == {
        (m, s, n)
        for m in ("less", "sisl", "sisp")
        for s in ("ar1", "cs", "binom")
        for n in (60, 90)
    }
    for rate in result.rates.values():
        assert 0.0 <= rate <= 1.0
        assert rate * cfg.replicates == round(rate * cfg.replicates)
    assert len(result.detail) == 4 * 3 * 2
    row = result.detail[0]
    assert set(row) == {"scenario", "n", "replicate", "hits"}
    assert set(row["hits"]) == {"less", "sisl", "sisp"}

    again = run_table2(cfg, p=50)
    assert again.rates == result.rates
    assert again.detail == result.detail


def test_table2_rates_rise_with_n():
    # the recovery probability must not fall as the sample grows
    # (allowing 0.02 of Monte Carlo slack at this small replicate count)
    cfg = ExperimentConfig("table2", replicates=15, n_values=(100, 200), seed=2)
    result = run_table2(cfg, p=120)
    for method in ("less", "sisl", "sisp"):
        for scenario in ("ar1", "cs", "binom"):
            lo = result.rates[(method, scenario, 100)]
            hi = result.rates[(method, scenario, 200)]
            assert hi >= lo - 0.02, (method, scenario, lo, hi)


def test_table2_same_draws_feed_all_methods():
    cfg = ExperimentConfig("table2", replicates=2, n_values=(60,), seed=5)
    a = run_table2(cfg, p=40)
    # a hit for one method cannot disagree across runs of the same config,
    # and the per-replicate record ties the three methods to one dataset
    b = run_table2(cfg, p=40)
    for ra, rb in zip(a.detail, b.detail):
        assert ra == rb


def test_figure1_panels_track_the_population_curves():
    cfg = ExperimentConfig("figure1", replicates=20, n_values=(200,), seed=4)
    result = run_figure1(cfg, p=30)
    assert result.active == (1, 2, 10, 15)
    assert [panel.cov for panel in result.panels] == ["ar1", "cs"]
    for panel in result.panels:
        assert panel.curve.beta_ls.shape == (30,)
        assert panel.less_mean.shape == (30,)
        # averaged statistics concentrate around the analytic limits
        assert np.max(np.abs(panel.less_mean - panel.curve.beta_ls)) < 0.08
        assert np.max(np.abs(panel.ml_mean - panel.curve.beta_ml)) < 0.35
        assert (panel.less_se > 0).all() and (panel.ml_se > 0).all()
    cs = result.panels[1]
    assert abs(cs.curve.beta_ls[14]) < 1e-12
    assert abs(cs.less_mean[14]) < 5 * cs.less_se[14] + 0.02


def test_figure1_deterministic():
    cfg = ExperimentConfig("figure1", replicates=3, n_values=(80,), seed=13)
    a = run_figure1(cfg, p=15)
    b = run_figure1(cfg, p=15)
    for pa, pb in zip(a.panels, b.panels):
        assert np.array_equal(pa.less_mean, pb.less_mean)
        assert np.array_equal(pa.ml_mean, pb.ml_mean)


def test_rate_studies_reject_small_p():
    cfg = ExperimentConfig("table2", replicates=1, n_values=(60,), seed=0)
    with pytest.raises(ValueError, match="p must be >= 15"):
        run_table2(cfg, p=10)
