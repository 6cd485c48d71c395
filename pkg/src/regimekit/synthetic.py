"""Synthetic two-regime return panel with known regime truth.

The generator builds, in order:

1. a latent AR(1) state b_t = alpha * b_{t-1} + eta_t with eta ~ N(0, noise_sd^2);
2. its min-max normalization b_bar (so min 0 and max 1 are attained);
3. the true regime indicator: HighVol where b_bar > threshold;
4. correlated Gaussian innovations Z_t ~ N(0, Sigma) with Sigma the
   equicorrelation matrix (sigma_diag on the diagonal, sigma_offdiag off it);
5. a per-asset variance proxy started at the squares of the first Z row
   and updated by sigma2 <- omega + beta * sigma2 after each period;
6. shocks e_t = sigma2 * Z_t, scaled by ``shock_multiplier`` in HighVol
   periods (the variance proxy used at t is the one in force before the
   period's update, with the initial value standing in for the
   pre-sample state at the first period);
7. returns r_t = mu + phi * r_{t-1} + e_t with r_0 starting from zero;
8. the dataset bundling returns, truth and b_bar with the seed.

Two independent RNG streams (regime path, innovations) are spawned from
the master seed, so changing only ``shock_multiplier`` or Sigma leaves
the regime path untouched.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import pandas as pd

from .market_data import ReturnPanel
from .regimes import RegimeSeries


class SyntheticError(ValueError):
    pass


@dataclass(frozen=True)
class SyntheticParams:
    alpha: float = 0.9
    noise_sd: float = 0.1
    threshold: float = 0.7
    sigma_diag: float = 0.3
    sigma_offdiag: float = 0.1
    phi: float = 0.2
    mu: float = 0.0
    omega: float = 0.3
    beta: float = 0.55
    shock_multiplier: float = 3.0

    def __post_init__(self):
        if abs(self.alpha) >= 1.0:
            raise SyntheticError(
                f"|alpha| must be < 1 for a stationary state path, got {self.alpha}"
            )
        if self.noise_sd <= 0.0:
            raise SyntheticError("noise_sd must be positive")
        if not 0.0 < self.threshold < 1.0:
            raise SyntheticError("threshold must lie in (0, 1)")
        if self.sigma_diag <= 0.0:
            raise SyntheticError("sigma_diag must be positive")
        if abs(self.phi) >= 1.0:
            raise SyntheticError("|phi| must be < 1")
        if self.omega <= 0.0 or not 0.0 <= self.beta < 1.0:
            raise SyntheticError("need omega > 0 and 0 <= beta < 1")
        if self.shock_multiplier <= 0.0:
            raise SyntheticError("shock_multiplier must be positive")

    def sigma(self, n: int) -> np.ndarray:
        mat = np.full((n, n), self.sigma_offdiag)
        np.fill_diagonal(mat, self.sigma_diag)
        if self.sigma_diag - self.sigma_offdiag <= 0.0 or (
            self.sigma_diag + (n - 1) * self.sigma_offdiag <= 0.0
        ):
            raise SyntheticError("innovation covariance is not positive definite")
        return mat


@dataclass(frozen=True)
class SyntheticDataset:
    returns: np.ndarray
    true_regime: np.ndarray
    b_bar: np.ndarray
    seed: int
    params: SyntheticParams = field(default_factory=SyntheticParams)

    def __len__(self) -> int:
        return len(self.returns)


def generate(
    periods: int,
    n_assets: int = 5,
    params: SyntheticParams | None = None,
    seed: int = 0,
) -> SyntheticDataset:
    """Simulate a return panel with a known volatility-regime path."""
    if periods < 50:
        raise SyntheticError("need at least 50 periods")
    if n_assets < 2:
        raise SyntheticError("need at least 2 assets")
    params = params or SyntheticParams()
    sigma = params.sigma(n_assets)
    root = np.random.SeedSequence(seed)
    regime_stream, innov_stream = root.spawn(2)
    rng_state = np.random.default_rng(regime_stream)
    rng_innov = np.random.default_rng(innov_stream)

    eta = rng_state.normal(0.0, params.noise_sd, size=periods)
    b = np.empty(periods)
    b[0] = eta[0]
    for t in range(1, periods):
        b[t] = params.alpha * b[t - 1] + eta[t]
    span = b.max() - b.min()
    if span == 0.0:
        raise SyntheticError("degenerate state path")
    b_bar = (b - b.min()) / span
    truth = b_bar > params.threshold

    chol = np.linalg.cholesky(sigma)
    z = rng_innov.standard_normal((periods, n_assets)) @ chol.T

    returns = np.empty((periods, n_assets))
    sigma2 = z[0] ** 2
    prev = np.zeros(n_assets)
    for t in range(periods):
        mult = params.shock_multiplier if truth[t] else 1.0
        shock = mult * sigma2 * z[t]
        prev = params.mu + params.phi * prev + shock
        returns[t] = prev
        sigma2 = params.omega + params.beta * sigma2
    return SyntheticDataset(
        returns=returns,
        true_regime=truth,
        b_bar=b_bar,
        seed=seed,
        params=params,
    )


def month_chunks(periods: int, month_length: int = 21) -> tuple[np.ndarray, int]:
    """Row-to-month labels for fixed-length months; trailing rows that do
    not fill a month are dropped.  Returns (labels, usable_rows)."""
    if month_length < 2:
        raise SyntheticError("month_length must be >= 2")
    n_months = periods // month_length
    if n_months < 2:
        raise SyntheticError("fewer than 2 whole months")
    usable = n_months * month_length
    labels = np.array(
        [f"m{idx:04d}" for idx in np.arange(usable) // month_length]
    )
    return labels, usable


def to_monthly_panel(
    dataset: SyntheticDataset, month_length: int = 21
) -> ReturnPanel:
    """Wrap the simulated rows as a ReturnPanel with fixed-length months."""
    labels, usable = month_chunks(len(dataset), month_length)
    ts = pd.date_range("2000-01-01", periods=usable, freq="h", tz="UTC")
    names = tuple(f"a{j}" for j in range(dataset.returns.shape[1]))
    return ReturnPanel(
        timestamps=ts,
        instruments=names,
        returns=dataset.returns[:usable],
        month_index=labels,
    )


def monthly_truth(
    dataset: SyntheticDataset,
    month_length: int = 21,
    min_share: float = 0.5,
) -> np.ndarray:
    """Aggregate the per-period truth to months: a month is HighVol when
    more than ``min_share`` of its rows are HighVol."""
    if not 0.0 <= min_share < 1.0:
        raise SyntheticError("min_share must lie in [0, 1)")
    _, usable = month_chunks(len(dataset), month_length)
    per_month = dataset.true_regime[:usable].reshape(-1, month_length)
    return per_month.mean(axis=1) > min_share


@dataclass(frozen=True)
class ConfusionMatrix:
    """2x2 regime confusion in proportions of all scored months.

    Rows index the realized regime (Calm, HighVol), columns the
    predicted one; ``highvol_as_calm`` is the economically dangerous
    cell: truly HighVol months predicted Calm.
    """

    cells: np.ndarray

    def __post_init__(self):
        cells = np.asarray(self.cells, dtype=float)
        if cells.shape != (2, 2):
            raise SyntheticError("confusion matrix must be 2x2")
        if abs(cells.sum() - 1.0) > 1e-9:
            raise SyntheticError("confusion cells must sum to 1")
        object.__setattr__(self, "cells", cells)

    @property
    def accuracy(self) -> float:
        return float(self.cells[0, 0] + self.cells[1, 1])

    @property
    def highvol_as_calm(self) -> float:
        return float(self.cells[1, 0])


def score(predicted: RegimeSeries | np.ndarray, truth: Sequence[bool]) -> ConfusionMatrix:
    """Confusion matrix of predicted labels against the truth.

    Accepts a monthly RegimeSeries or a plain boolean vector; the latter
    lets monthly labels be broadcast to the generator's per-row truth
    before scoring.
    """
    pred = predicted.highvol if isinstance(predicted, RegimeSeries) else np.asarray(
        predicted, dtype=bool
    )
    truth = np.asarray(truth, dtype=bool)
    if len(pred) != len(truth):
        raise SyntheticError(
            f"prediction covers {len(pred)} periods, truth {len(truth)}"
        )
    if len(truth) == 0:
        raise SyntheticError("nothing to score")
    cells = np.empty((2, 2))
    for i, real_high in enumerate((False, True)):
        for j, pred_high in enumerate((False, True)):
            cells[i, j] = np.mean((truth == real_high) & (pred == pred_high))
    return ConfusionMatrix(cells=cells)
