import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from regimekit import (
    BacktestError,
    CostParams,
    RegimeSeries,
    apply_regime_filter,
    momentum_signal,
    moving_average,
    run_backtest,
    sharpe_ratio,
)


def _trend(n=120, up=True):
    step = 1.01 if up else 0.99
    return 100.0 * step ** np.arange(n)


def test_moving_average_oracle():
    out = moving_average(np.array([1.0, 2.0, 3.0, 4.0]), 2)
    assert np.isnan(out[0])
    assert_allclose(out[1:], [1.5, 2.5, 3.5], rtol=1e-15)
    assert_array_equal(moving_average(np.array([5.0, 6.0]), 1), [5.0, 6.0])
    with pytest.raises(BacktestError):
        moving_average(np.ones(3), 4)
    with pytest.raises(BacktestError):
        moving_average(np.ones(3), 0)


def test_momentum_long_only_after_slow_window_fills():
    sig = momentum_signal(_trend(), short=30, long=100)
    assert not sig[:99].any()
    assert sig[99:].all()


def test_momentum_flat_on_downtrend_and_constant():
    assert not momentum_signal(_trend(up=False), 30, 100).any()
    assert not momentum_signal(np.full(120, 50.0), 30, 100).any()


def test_momentum_preconditions():
    with pytest.raises(BacktestError):
        momentum_signal(_trend(), short=100, long=100)
    with pytest.raises(BacktestError):
        momentum_signal(_trend(n=80), 30, 100)
    bad = _trend()
    bad[5] = -1.0
    with pytest.raises(BacktestError):
        momentum_signal(bad, 30, 100)


def test_always_flat_stays_at_one():
    prices = _trend(50)
    res = run_backtest(prices, np.zeros(50, dtype=bool))
    assert_array_equal(res.equity_curve, np.ones(50))
    assert res.trades == ()
    assert res.sharpe_annualized == 0.0
    assert res.total_costs_bp == 0.0


def test_zero_cost_always_long_is_buy_and_hold():
    rng = np.random.default_rng(0)
    prices = 100.0 * np.exp(np.cumsum(rng.normal(0.0, 0.01, size=200)))
    res = run_backtest(prices, np.ones(200, dtype=bool), CostParams(0.0, 0.0))
    assert_allclose(res.equity_curve, prices / prices[0], rtol=1e-12)
    assert res.trades == ((0, "buy"),)


def test_flat_cost_round_trip():
    prices = 100.0 * 1.01 ** np.arange(5)
    signal = np.array([False, True, True, False, False])
    res = run_backtest(prices, signal, CostParams(3.0, 0.0))
    assert res.trades == ((1, "buy"), (3, "sell"))
    assert res.n_trades == 2
    # 3 bp charged on each unit of turnover: entry and exit
    assert_allclose(res.total_costs_bp, 6.0, rtol=1e-12)
    assert_allclose(
        res.daily_returns,
        [-3e-4, 0.01, 0.01 - 3e-4, 0.0],
        atol=1e-15,
    )


def test_entry_on_first_day_books_cost():
    prices = 100.0 * 1.01 ** np.arange(4)
    res = run_backtest(prices, np.ones(4, dtype=bool), CostParams(2.0, 0.0))
    assert_allclose(res.daily_returns[0], 0.01 - 2e-4, atol=1e-15)
    assert res.trades == ((0, "buy"),)


def test_cost_normalization_by_mean_vol():
    prices = np.array([100.0, 101.0, 102.0])
    vol = np.array([0.5, 1.0, 1.5])
    signal = np.array([True, True, False])
    res = run_backtest(prices, signal, CostParams(1.0, 0.5), intraday_vol=vol)
    # vol_bar over days 1.. is 1.25, so the bp schedule is 1 + 0.5 * vol / 1.25
    assert_allclose(res.costs_bp, [1.2, 1.4, 1.6], rtol=1e-12)
    assert_allclose(res.total_costs_bp, 1.2 + 1.6, rtol=1e-12)
    raw = run_backtest(
        prices, signal, CostParams(1.0, 0.5, normalize_vol=False), intraday_vol=vol
    )
    assert_allclose(raw.costs_bp, [1.25, 1.5, 1.75], rtol=1e-12)
    assert_allclose(raw.total_costs_bp, 3.0, rtol=1e-12)


def test_price_scale_invariance():
    rng = np.random.default_rng(1)
    prices = 50.0 * np.exp(np.cumsum(rng.normal(0.0, 0.01, size=150)))
    sig = momentum_signal(prices, 10, 40)
    assert_array_equal(sig, momentum_signal(1000.0 * prices, 10, 40))
    a = run_backtest(prices, sig)
    b = run_backtest(1000.0 * prices, sig)
    assert_allclose(a.equity_curve, b.equity_curve, rtol=1e-12)


def test_sharpe_oracle_and_degenerate_cases():
    assert_allclose(
        sharpe_ratio(np.array([0.01, 0.02])), 33.67491648096547, rtol=1e-12
    )
    assert sharpe_ratio(np.zeros(30)) == 0.0
    # 0.25 is exactly representable, so the deviations vanish exactly
    assert sharpe_ratio(np.full(30, 0.25)) == 0.0
    assert sharpe_ratio(np.array([0.01])) == 0.0


def _regimes(months, hot):
    return RegimeSeries(
        months=tuple(months),
        highvol=np.asarray(hot, dtype=bool),
        detector="vlstar",
    )


def test_all_calm_filter_is_identity():
    rng = np.random.default_rng(2)
    signal = rng.uniform(size=60) > 0.5
    day_months = np.repeat([f"m{i}" for i in range(3)], 20)
    regimes = _regimes([f"m{i}" for i in range(3)], [False] * 3)
    filtered = apply_regime_filter(signal, regimes, day_months)
    assert_array_equal(filtered, signal)
    prices = 100.0 * np.exp(np.cumsum(rng.normal(0.0, 0.01, size=60)))
    assert_array_equal(
        run_backtest(prices, filtered).equity_curve,
        run_backtest(prices, signal).equity_curve,
    )


def test_all_highvol_filter_knocks_flat():
    signal = np.ones(40, dtype=bool)
    day_months = np.repeat(["a", "b"], 20)
    filtered = apply_regime_filter(signal, _regimes(["a", "b"], [True, True]), day_months)
    assert not filtered.any()


def test_filter_only_hits_hot_months():
    signal = np.ones(40, dtype=bool)
    day_months = np.repeat(["a", "b"], 20)
    filtered = apply_regime_filter(signal, _regimes(["a", "b"], [False, True]), day_months)
    assert filtered[:20].all()
    assert not filtered[20:].any()


def test_filter_rejects_uncovered_month():
    signal = np.ones(10, dtype=bool)
    with pytest.raises(BacktestError, match="not covered"):
        apply_regime_filter(signal, _regimes(["a"], [False]), ["a"] * 5 + ["zz"] * 5)


def test_filter_rejects_misaligned_days():
    with pytest.raises(BacktestError):
        apply_regime_filter(np.ones(5, dtype=bool), _regimes(["a"], [False]), ["a"] * 4)


def test_run_backtest_preconditions():
    prices = _trend(10)
    with pytest.raises(BacktestError):
        run_backtest(prices, np.ones(9, dtype=bool))
    with pytest.raises(BacktestError):
        run_backtest(prices[:1], np.ones(1, dtype=bool))
    with pytest.raises(BacktestError):
        CostParams(-1.0, 0.0)
    with pytest.raises(BacktestError):
        run_backtest(prices, np.ones(10, dtype=bool), intraday_vol=np.ones(9))
    with pytest.raises(BacktestError):
        run_backtest(prices, np.ones(10, dtype=bool), intraday_vol=-np.ones(10))
