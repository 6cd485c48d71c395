import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from regimekit import (
    FracDiffError,
    estimate_d,
    frac_difference,
    fracdiff_weights,
    partial_window_count,
)


def test_weights_d_half_oracle():
    # w_k = w_{k-1} * (k - 1 - d) / k starting from w_0 = 1
    w = fracdiff_weights(0.5, 4)
    assert_allclose(w, [1.0, -0.5, -0.125, -0.0625], rtol=1e-15)


def test_weights_d_one_truncates_to_first_difference():
    w = fracdiff_weights(1.0, 5)
    assert_allclose(w, [1.0, -1.0, 0.0, 0.0, 0.0], atol=1e-15)


def test_weights_d_zero_identity():
    assert_allclose(fracdiff_weights(0.0, 4), [1.0, 0.0, 0.0, 0.0], atol=1e-15)


def test_frac_difference_d1_is_first_difference():
    rng = np.random.default_rng(3)
    x = rng.normal(size=300)
    out = frac_difference(x, 1.0)
    assert_allclose(out[0], x[0], rtol=1e-15)
    assert_allclose(out[1:], np.diff(x), atol=1e-12)


def test_frac_difference_d0_is_identity():
    rng = np.random.default_rng(4)
    x = rng.normal(size=128)
    assert_allclose(frac_difference(x, 0.0), x, rtol=1e-15)


def test_frac_difference_truncation_window():
    rng = np.random.default_rng(5)
    x = rng.normal(size=50)
    full = frac_difference(x, 0.4, truncation=50)
    short = frac_difference(x, 0.4, truncation=10)
    # inside the truncation window the two agree, beyond it they differ
    assert_allclose(short[:10], full[:10], rtol=1e-12)
    assert not np.allclose(short[10:], full[10:])


def test_frac_difference_invalid_truncation():
    x = np.zeros(10)
    with pytest.raises(FracDiffError):
        frac_difference(x, 0.3, truncation=0)
    with pytest.raises(FracDiffError):
        frac_difference(x, 0.3, truncation=11)


def test_partial_window_count():
    # entry i uses min(i + 1, truncation) weights, so i < truncation - 1 is partial
    assert partial_window_count(100, 300) == 100
    assert partial_window_count(50, 300) == 50
    assert partial_window_count(1000, 300) == 299
    assert partial_window_count(10, 1) == 0


def test_estimate_d_white_noise_centered_on_zero():
    # memory parameter of white noise is 0
    ds = []
    for seed in range(100):
        rng = np.random.default_rng(seed)
        spec = estimate_d(rng.standard_normal(4096))
        ds.append(spec.d)
    assert abs(float(np.median(ds))) < 0.1


def test_estimate_d_detects_long_memory_direction():
    # fractionally integrating white noise with d = 0.4 must push the
    # estimate well above the white-noise value
    est = []
    for seed in range(20):
        rng = np.random.default_rng(100 + seed)
        x = rng.standard_normal(4096)
        w = fracdiff_weights(-0.4, 512)
        y = np.convolve(x, w)[: len(x)]
        est.append(estimate_d(y).d)
    assert float(np.median(est)) > 0.2


def test_estimate_d_short_series_error():
    with pytest.raises(FracDiffError):
        estimate_d(np.zeros(16) + np.arange(16))


def test_estimate_d_constant_error():
    with pytest.raises(FracDiffError):
        estimate_d(np.ones(64))


def test_estimate_d_records_bandwidth():
    rng = np.random.default_rng(9)
    spec = estimate_d(rng.standard_normal(1024), bandwidth=40, instrument_id="ES")
    assert spec.bandwidth == 40
    assert spec.instrument_id == "ES"


def test_weights_monotone_decay_for_positive_d():
    w = np.abs(fracdiff_weights(0.35, 200))
    assert np.all(np.diff(w[1:]) <= 1e-15)
