import dataclasses

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from regimekit import RealizedCovSeries, TvarError, fit_tvar, label_regimes_tvar


def _threshold_data(seed, t=600, c=0.0):
    """Bivariate VAR(1) whose coefficients switch on the lagged indicator."""
    rng = np.random.default_rng(seed)
    s = rng.normal(size=t)
    y = np.zeros((t, 2))
    mu_lo = np.array([0.4, -0.2])
    phi_lo = np.array([[0.3, 0.0], [0.1, 0.2]])
    mu_hi = np.array([-0.6, 0.5])
    phi_hi = np.array([[0.1, -0.2], [0.0, 0.35]])
    eps = rng.normal(scale=0.25, size=(t, 2))
    for i in range(1, t):
        if s[i - 1] <= c:
            y[i] = mu_lo + phi_lo @ y[i - 1] + eps[i]
        else:
            y[i] = mu_hi + phi_hi @ y[i - 1] + eps[i]
    return y, s


def test_threshold_recovery():
    for seed in range(5):
        y, s = _threshold_data(seed)
        fit = fit_tvar(y, s)
        assert abs(fit.threshold) <= 0.2
        assert_allclose(fit.mu_low, [0.4, -0.2], atol=0.15)
        assert_allclose(fit.mu_high, [-0.6, 0.5], atol=0.15)


def test_regime_sides_follow_lagged_indicator():
    y, s = _threshold_data(1)
    fit = fit_tvar(y, s)
    assert_array_equal(fit.low_regime, s[:-1] <= fit.threshold)
    assert_array_equal(fit.threshold_values, s[:-1])


def test_ssr_never_worse_than_pooled_var():
    y, s = _threshold_data(2)
    fit = fit_tvar(y, s)
    design = np.column_stack([np.ones(len(y) - 1), y[:-1]])
    coef, *_ = np.linalg.lstsq(design, y[1:], rcond=None)
    ssr_pooled = float(((y[1:] - design @ coef) ** 2).sum())
    assert fit.ssr <= ssr_pooled + 1e-8


def test_linear_data_ssr_close_to_pooled():
    # no true split: the best split should barely improve on one VAR
    rng = np.random.default_rng(3)
    t = 600
    s = rng.normal(size=t)
    y = np.zeros((t, 2))
    eps = rng.normal(scale=0.25, size=(t, 2))
    phi = np.array([[0.3, 0.1], [0.0, 0.2]])
    for i in range(1, t):
        y[i] = phi @ y[i - 1] + eps[i]
    fit = fit_tvar(y, s)
    design = np.column_stack([np.ones(t - 1), y[:-1]])
    coef, *_ = np.linalg.lstsq(design, y[1:], rcond=None)
    ssr_pooled = float(((y[1:] - design @ coef) ** 2).sum())
    assert fit.ssr >= 0.95 * ssr_pooled


def test_threshold_affine_equivariance():
    # rescaling s rescales the threshold the same way
    y, s = _threshold_data(4)
    fa = fit_tvar(y, s)
    fb = fit_tvar(y, 2.0 * s + 5.0)
    assert_allclose(fb.threshold, 2.0 * fa.threshold + 5.0, rtol=1e-12)
    assert_array_equal(fa.low_regime, fb.low_regime)
    assert_allclose(fa.ssr, fb.ssr, rtol=1e-10)


def test_regime_floor_skips_and_errors():
    y, s = _threshold_data(5, t=100)
    # an extreme spike pushes low percentiles into a tiny regime; those skip
    s_spiked = s.copy()
    s_spiked[:5] = -50.0
    fit = fit_tvar(y, s_spiked, min_share=0.25)
    assert fit.n_skipped > 0
    assert fit.n_candidates == 81
    # binary s with one side below every floor: all candidates skipped
    s_binary = np.where(np.arange(len(y)) % 25 == 0, 1.0, 0.0)
    with pytest.raises(TvarError, match="floor"):
        fit_tvar(y, s_binary, min_share=0.45)


def test_preconditions():
    y, s = _threshold_data(6, t=50)
    with pytest.raises(TvarError):
        fit_tvar(y[:6], s[:6])
    with pytest.raises(TvarError):
        fit_tvar(y, s[:-1])
    with pytest.raises(TvarError):
        fit_tvar(y[:, 0], s)
    with pytest.raises(TvarError):
        fit_tvar(y, s, min_share=0.6)
    s_bad = s.copy()
    s_bad[3] = np.nan
    with pytest.raises(TvarError):
        fit_tvar(y, s_bad)
    with pytest.raises(TvarError):
        fit_tvar(y, s, months=["m"] * 3)


def _rcov(traces):
    mats = np.stack([np.eye(2) * tr / 2.0 for tr in traces])
    months = tuple(f"m{i:02d}" for i in range(len(traces)))
    return RealizedCovSeries(months=months, matrices=mats, instruments=("A", "B"))


def test_labeling_maps_high_trace_side_to_highvol():
    y, s = _threshold_data(7, t=200)
    fit = fit_tvar(y, s)
    # traces large exactly where the fitted low regime sits
    traces = np.ones(200)
    traces[1:][fit.low_regime] = 9.0
    regimes = label_regimes_tvar(fit, _rcov(traces))
    assert regimes.detector == "tvar"
    assert_array_equal(regimes.highvol[1:], fit.low_regime)
    assert regimes.highvol[0] == regimes.highvol[1]
    assert np.isnan(regimes.transition[0])
    # flip the traces and the mapping flips
    traces_flipped = np.ones(200)
    traces_flipped[1:][~fit.low_regime] = 9.0
    flipped = label_regimes_tvar(fit, _rcov(traces_flipped))
    assert_array_equal(flipped.highvol[1:], ~fit.low_regime)


def test_labeling_single_side_all_calm():
    y, s = _threshold_data(8, t=60)
    fit = fit_tvar(y, s)
    forced = dataclasses.replace(fit, low_regime=np.ones_like(fit.low_regime))
    with pytest.warns(UserWarning, match="single-regime"):
        regimes = label_regimes_tvar(forced, _rcov(np.ones(60)))
    assert not regimes.highvol.any()


def test_labeling_month_mismatch():
    y, s = _threshold_data(9, t=60)
    fit = fit_tvar(y, s)
    with pytest.raises(TvarError):
        label_regimes_tvar(fit, _rcov(np.ones(59)))
