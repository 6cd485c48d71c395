import numpy as np
import pandas as pd
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from regimekit import (
    CovarianceError,
    ReturnPanel,
    cov_panel,
    metric_panel,
    realized_covariance,
    to_correlation,
    to_metric,
    unvech,
    vech,
    vech_names,
)


def _panel(returns, month_rows, start="2010-01-04T10:00"):
    returns = np.asarray(returns, dtype=float)
    stamps = pd.date_range(start, periods=len(returns), freq="h", tz="UTC")
    months = np.concatenate(
        [np.repeat(f"m{i:02d}", k) for i, k in enumerate(month_rows)]
    )
    return ReturnPanel(
        timestamps=stamps,
        instruments=tuple(f"a{j}" for j in range(returns.shape[1])),
        returns=returns,
        month_index=months,
    )


def test_vech_identity_oracle():
    assert_array_equal(vech(np.eye(3)), [1.0, 0.0, 0.0, 1.0, 0.0, 1.0])


def test_vech_unvech_roundtrip():
    rng = np.random.default_rng(0)
    a = rng.normal(size=(4, 4))
    sym = a + a.T
    assert_allclose(unvech(vech(sym)), sym, rtol=1e-15)


def test_strict_vech_excludes_diagonal():
    m = np.array([[0.0, 0.3, 0.1], [0.3, 0.0, 0.7], [0.1, 0.7, 0.0]])
    v = vech(m, strict=True)
    assert_array_equal(v, [0.3, 0.1, 0.7])
    assert_allclose(unvech(v, strict=True), m, rtol=1e-15)


def test_vech_names_ordering():
    names = vech_names(("ES", "NQ", "CL"))
    assert names == ["ES~ES", "NQ~ES", "CL~ES", "NQ~NQ", "CL~NQ", "CL~CL"]
    assert vech_names(("ES", "NQ", "CL"), strict=True) == ["NQ~ES", "CL~ES", "CL~NQ"]


def test_bad_vech_length():
    with pytest.raises(CovarianceError):
        unvech(np.zeros(4))


def test_realized_covariance_sums_outer_products():
    rng = np.random.default_rng(1)
    rets = rng.normal(size=(40, 2))
    panel = _panel(rets, [20, 20])
    rcov = realized_covariance(panel)
    assert rcov.months == ("m00", "m01")
    assert_allclose(rcov.matrices[0], rets[:20].T @ rets[:20], rtol=1e-12)
    assert_allclose(rcov.matrices[1], rets[20:].T @ rets[20:], rtol=1e-12)


def test_realized_covariance_scale_by_rows():
    rng = np.random.default_rng(2)
    rets = rng.normal(size=(30, 2))
    panel = _panel(rets, [30])
    raw = realized_covariance(panel)
    scaled = realized_covariance(panel, scale_by_rows=True)
    assert_allclose(scaled.matrices[0], raw.matrices[0] / 30.0, rtol=1e-12)


def test_short_month_skipped_with_warning():
    rng = np.random.default_rng(3)
    rets = rng.normal(size=(23, 2))
    panel = _panel(rets, [20, 3])  # 3 rows is N + 1 for N = 2, so keep both
    rcov = realized_covariance(panel)
    assert len(rcov) == 2
    panel = _panel(rets, [21, 2])  # 2 rows < N + 1
    with pytest.warns(UserWarning, match="skip"):
        rcov = realized_covariance(panel)
    assert rcov.months == ("m00",)


def test_all_matrices_psd_on_random_data():
    rng = np.random.default_rng(4)
    rets = rng.normal(size=(200, 4))
    panel = _panel(rets, [50, 50, 50, 50])
    rcov = realized_covariance(panel)
    for m in rcov.matrices:
        assert np.linalg.eigvalsh(m).min() >= -1e-10
        assert_allclose(m, m.T, rtol=1e-15)


def test_monte_carlo_consistency():
    # RCov over T iid rows, divided by T, converges to the population
    # covariance in Frobenius norm
    rng = np.random.default_rng(5)
    sigma = np.array([[1.0, 0.3, 0.1], [0.3, 1.5, 0.2], [0.1, 0.2, 0.8]])
    chol = np.linalg.cholesky(sigma)
    rets = rng.standard_normal((500, 3)) @ chol.T
    panel = _panel(rets, [500])
    rcov = realized_covariance(panel)
    err = np.linalg.norm(rcov.matrices[0] / 500.0 - sigma)
    assert err < 0.15 * np.linalg.norm(sigma)


def test_to_correlation_oracle():
    corr = to_correlation(np.array([[2.0, -1.0], [-1.0, 2.0]]))
    assert_allclose(corr, [[1.0, -0.5], [-0.5, 1.0]], rtol=1e-15)


def test_to_correlation_rejects_zero_variance():
    with pytest.raises(CovarianceError):
        to_correlation(np.array([[0.0, 0.0], [0.0, 1.0]]))


def test_to_metric_oracle():
    corr = np.array([[1.0, -0.5], [-0.5, 1.0]])
    metric = to_metric(corr)
    assert_allclose(metric, [[0.0, 0.75], [0.75, 0.0]], rtol=1e-15)


def test_metric_range_and_zero_diagonal():
    rng = np.random.default_rng(6)
    rets = rng.normal(size=(60, 3))
    panel = _panel(rets, [60])
    rcov = realized_covariance(panel)
    metric = to_metric(to_correlation(rcov.matrices[0]))
    assert_array_equal(np.diag(metric), np.zeros(3))
    assert metric.min() >= 0.0 and metric.max() <= 1.0


def test_cov_and_metric_panels_shapes():
    rng = np.random.default_rng(7)
    rets = rng.normal(size=(80, 3))
    panel = _panel(rets, [40, 40])
    rcov = realized_covariance(panel)
    assert cov_panel(rcov).shape == (2, 6)
    assert metric_panel(rcov).shape == (2, 3)


def test_traces():
    rng = np.random.default_rng(8)
    rets = rng.normal(size=(40, 2))
    panel = _panel(rets, [20, 20])
    rcov = realized_covariance(panel)
    assert_allclose(
        rcov.traces(), [np.trace(rcov.matrices[0]), np.trace(rcov.matrices[1])]
    )
