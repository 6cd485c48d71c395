"""Regime-filtered moving-average momentum backtest.

The raw signal is long when the 30-day moving average of the price sits
strictly above the 100-day one, flat otherwise (and flat while the long
window is still filling).  A regime filter knocks the signal flat in
months labeled HighVol.  Execution lags the signal by one day:

    strategy_return_t = position_{t-1} * asset_return_t
                        - cost_t * |position_t - position_{t-1}|

so the position decided on day t earns day t+1's return and pays its
switch cost on decision day.  Per-trade cost in basis points is
lambda0 + lambda1_inv * sigma_t / sigma_bar, a constant leg plus a leg
in the day's volatility (|return| unless an intraday measure is given),
normalized by the sample mean so the level is scale-free; a flag
switches to the raw, unnormalized volatility leg.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .regimes import RegimeSeries


class BacktestError(ValueError):
    pass


@dataclass(frozen=True)
class CostParams:
    lambda0_bp: float = 1.0
    lambda1_inv_bp: float = 0.5
    normalize_vol: bool = True

    def __post_init__(self):
        if self.lambda0_bp < 0.0 or self.lambda1_inv_bp < 0.0:
            raise BacktestError("cost legs must be non-negative")


def moving_average(x: np.ndarray, window: int) -> np.ndarray:
    """Trailing mean; entries before the window fills are NaN."""
    x = np.asarray(x, dtype=float)
    if window < 1 or window > len(x):
        raise BacktestError(f"window {window} outside [1, {len(x)}]")
    out = np.full(len(x), np.nan)
    csum = np.cumsum(x)
    out[window - 1 :] = (csum[window - 1 :] - np.concatenate([[0.0], csum[:-window]])) / window
    return out


def momentum_signal(prices: np.ndarray, short: int = 30, long: int = 100) -> np.ndarray:
    """Long where the short moving average is strictly above the long one.

    The first long-1 days are flat while the slow window fills; a
    constant price series is flat throughout (strict inequality).
    """
    prices = np.asarray(prices, dtype=float)
    if short >= long:
        raise BacktestError("short window must be below the long window")
    if len(prices) < long:
        raise BacktestError(f"need at least {long} prices, got {len(prices)}")
    if np.any(~np.isfinite(prices)) or np.any(prices <= 0.0):
        raise BacktestError("prices must be positive and finite")
    fast = moving_average(prices, short)
    slow = moving_average(prices, long)
    signal = np.zeros(len(prices), dtype=bool)
    ready = ~np.isnan(slow)
    signal[ready] = fast[ready] > slow[ready]
    return signal


def apply_regime_filter(
    signal: np.ndarray,
    regimes: RegimeSeries,
    day_months: Sequence[str],
) -> np.ndarray:
    """Knock the signal flat in HighVol months.

    ``day_months`` gives each day's month label; every label must be
    covered by ``regimes``.
    """
    signal = np.asarray(signal, dtype=bool)
    day_months = np.asarray(day_months)
    if len(signal) != len(day_months):
        raise BacktestError("day_months must align with the signal")
    calm = {m: not hv for m, hv in zip(regimes.months, regimes.highvol)}
    missing = sorted(set(day_months) - set(regimes.months))
    if missing:
        raise BacktestError(f"months not covered by regime labels: {missing[:5]}")
    keep = np.array([calm[m] for m in day_months])
    return signal & keep


@dataclass(frozen=True)
class StrategyResult:
    positions: np.ndarray       # decided position per day, True = long
    equity_curve: np.ndarray    # starts at 1.0, length = len(prices)
    trades: tuple[tuple[int, str], ...]  # (day index, 'buy'/'sell')
    daily_returns: np.ndarray   # net strategy returns, length = len(prices) - 1
    costs_bp: np.ndarray        # cost charged per day in basis points
    sharpe_annualized: float
    total_costs_bp: float

    @property
    def n_trades(self) -> int:
        return len(self.trades)


def sharpe_ratio(returns: np.ndarray, periods_per_year: int = 252) -> float:
    """Annualized mean over standard deviation; 0/0 collapses to 0."""
    returns = np.asarray(returns, dtype=float)
    if len(returns) < 2:
        return 0.0
    sd = returns.std(ddof=1)
    if sd == 0.0:
        return 0.0
    return float(returns.mean() / sd * np.sqrt(periods_per_year))


def run_backtest(
    prices: np.ndarray,
    signal: np.ndarray,
    costs: CostParams = CostParams(),
    intraday_vol: np.ndarray | None = None,
) -> StrategyResult:
    """Run the one-asset long/flat strategy for a daily price path.

    ``signal`` is the decided position per day (after any regime
    filtering).  ``intraday_vol`` optionally supplies the volatility
    measure entering the cost leg; the default is the day's absolute
    return.
    """
    prices = np.asarray(prices, dtype=float)
    signal = np.asarray(signal, dtype=bool)
    if len(prices) != len(signal):
        raise BacktestError("signal must align with prices")
    if len(prices) < 2:
        raise BacktestError("need at least 2 prices")
    if np.any(~np.isfinite(prices)) or np.any(prices <= 0.0):
        raise BacktestError("prices must be positive and finite")
    rets = prices[1:] / prices[:-1] - 1.0
    if intraday_vol is None:
        vol = np.concatenate([[0.0], np.abs(rets)])
    else:
        vol = np.asarray(intraday_vol, dtype=float)
        if len(vol) != len(prices):
            raise BacktestError("intraday_vol must align with prices")
        if np.any(vol < 0.0) or np.any(~np.isfinite(vol)):
            raise BacktestError("intraday_vol must be non-negative and finite")
    if costs.normalize_vol:
        vol_bar = vol[1:].mean()
        ratio = vol / vol_bar if vol_bar > 0.0 else np.zeros_like(vol)
    else:
        ratio = vol
    cost_bp = costs.lambda0_bp + costs.lambda1_inv_bp * ratio

    pos = signal.astype(float)
    turnover = np.abs(np.diff(np.concatenate([[0.0], pos])))
    strat = pos[:-1] * rets - cost_bp[1:] * 1e-4 * turnover[1:]
    # a position already on at day 0 books its entry cost with the first return
    day0_cost = cost_bp[0] * 1e-4 * turnover[0]
    if day0_cost:
        strat[0] -= day0_cost
    equity = np.concatenate([[1.0], np.cumprod(1.0 + strat)])
    moves = np.flatnonzero(turnover != 0.0)
    trades = tuple(
        (int(i), "buy" if pos[i] > (pos[i - 1] if i else 0.0) else "sell") for i in moves
    )
    return StrategyResult(
        positions=signal,
        equity_curve=equity,
        trades=trades,
        daily_returns=strat,
        costs_bp=cost_bp,
        sharpe_annualized=sharpe_ratio(strat),
        total_costs_bp=float((cost_bp * turnover).sum()),
    )
