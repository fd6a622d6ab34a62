import numpy as np
import pytest

from felogit import SimConfig, existence_rate, generate_panel


def test_same_seed_and_rep_reproduce_the_panel():
    config = SimConfig(n=6, T=3, p=2, beta0=np.array([1.0, -0.5]), seed=42)
    a = generate_panel(config, rep=3)
    b = generate_panel(config, rep=3)
    assert np.array_equal(a.covariates, b.covariates)
    assert np.array_equal(a.outcomes, b.outcomes)
    c = generate_panel(config, rep=4)
    assert not np.array_equal(a.outcomes, c.outcomes)


def test_minimal_panel_shape():
    config = SimConfig(n=1, T=1, p=1, beta0=np.array([0.3]), seed=9)
    data = generate_panel(config)
    assert (data.n, data.T, data.p) == (1, 1, 1)
    assert data.outcomes[0, 0] in (0, 1)


def test_outcome_mean_is_half_under_null():
    config = SimConfig(n=100_000, T=1, p=1, beta0=np.array([0.0]),
                       effect_scale=0.0, seed=2024)
    data = generate_panel(config)
    assert abs(data.outcomes.mean() - 0.5) < 0.01


def test_config_validation():
    with pytest.raises(ValueError):
        SimConfig(n=0, T=3, p=1, beta0=np.array([1.0]))
    with pytest.raises(ValueError):
        SimConfig(n=3, T=3, p=1, beta0=np.array([1.0]), replications=0)
    with pytest.raises(ValueError):
        SimConfig(n=3, T=3, p=1, beta0=np.array([1.0, 2.0]))
    with pytest.raises(ValueError):
        SimConfig(n=3, T=3, p=1, beta0=np.array([1.0]), seed=-1)


def test_single_replication_report_shape():
    config = SimConfig(n=4, T=3, p=1, beta0=np.array([1.0]), replications=1, seed=5)
    report = existence_rate(config)
    assert len(report.panel_exists) == 1
    assert len(report.pooled_exists) == 1
    assert isinstance(report.panel_exists[0], bool)
    assert isinstance(report.pooled_exists[0], bool)


def test_existence_rate_deterministic():
    config = SimConfig(n=5, T=3, p=1, beta0=np.array([1.0]), replications=20, seed=17)
    a = existence_rate(config)
    b = existence_rate(config)
    assert a.panel_exists == b.panel_exists
    assert a.panel_qp_min == b.panel_qp_min
    assert a.pooled_exists == b.pooled_exists


def test_small_panels_fail_often():
    config = SimConfig(n=2, T=2, p=1, beta0=np.array([1.0]), replications=2000, seed=77)
    report = existence_rate(config)
    assert report.panel_exists_fraction < 0.9
    # non-existence here is dominated by separation or fully degenerate draws
    assert any(s != "exists_unique" for s in report.panel_status)


def test_large_panels_almost_always_exist():
    config = SimConfig(n=200, T=3, p=1, beta0=np.array([1.0]), replications=200, seed=7)
    report = existence_rate(config)
    assert report.panel_exists_fraction >= 0.99
