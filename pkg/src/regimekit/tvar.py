"""Threshold VAR(1) baseline with a hard regime switch.

Observation t belongs to the low regime when s_{t-1} <= c, where s is
the same transition variable the smooth-transition model uses; each side
of the split gets its own VAR(1) by least squares.  The threshold c is
chosen by grid search over percentiles of the lagged threshold variable,
minimizing the pooled SSR, with every candidate required to leave at
least a fixed share of observations in both regimes.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .realized_cov import RealizedCovSeries
from .regimes import RegimeSeries


class TvarError(ValueError):
    pass


@dataclass(frozen=True)
class TvarFit:
    n: int
    threshold: float
    threshold_id: str
    mu_low: np.ndarray
    phi_low: np.ndarray
    mu_high: np.ndarray
    phi_high: np.ndarray
    ssr: float
    low_regime: np.ndarray      # True where s_{t-1} <= threshold (effective rows)
    threshold_values: np.ndarray  # s_{t-1} per effective row
    months: tuple[str, ...]     # all input months incl. the burn-in row
    n_candidates: int
    n_skipped: int


def _regime_ols(design, targets):
    coef, *_ = np.linalg.lstsq(design, targets, rcond=None)
    resid = targets - design @ coef
    return coef, float((resid**2).sum())


def fit_tvar(
    y: np.ndarray,
    s: np.ndarray,
    threshold_id: str = "",
    months: Sequence[str] | None = None,
    n_candidates: int = 81,
    trim: tuple[float, float] = (10.0, 90.0),
    min_share: float = 0.10,
) -> TvarFit:
    """Fit a two-regime VAR(1) with threshold on the lagged variable s.

    ``s`` aligns with the rows of ``y``; the regime of observation t is
    decided by s_{t-1}.  Candidates are ``n_candidates`` percentiles of
    the lagged series between ``trim``; a candidate leaving either
    regime below ``min_share`` of the sample is skipped.  If every
    candidate is skipped the fit fails.  Ties in SSR go to the lowest
    candidate (ascending grid, strict improvement required).
    """
    y = np.asarray(y, dtype=float)
    s = np.asarray(s, dtype=float)
    if y.ndim != 2:
        raise TvarError("y must be T x n")
    t, n = y.shape
    if len(s) != t:
        raise TvarError("threshold variable must align with y rows")
    if t < 2 * (n + 1) + 2:
        raise TvarError(f"sample too short: T={t}")
    if not 0.0 < min_share < 0.5:
        raise TvarError("min_share must lie in (0, 0.5)")
    targets = y[1:]
    design = np.column_stack([np.ones(t - 1), y[:-1]])
    s_lag = s[:-1]
    if not np.all(np.isfinite(s_lag)):
        raise TvarError("threshold variable has non-finite values")
    candidates = np.percentile(s_lag, np.linspace(trim[0], trim[1], n_candidates))
    floor = int(np.ceil(min_share * len(targets)))
    best_ssr = np.inf
    best_c = None
    skipped = 0
    for c in candidates:
        low = s_lag <= c
        n_low = int(low.sum())
        if n_low < floor or len(targets) - n_low < floor:
            skipped += 1
            continue
        _, ssr_low = _regime_ols(design[low], targets[low])
        _, ssr_high = _regime_ols(design[~low], targets[~low])
        ssr = ssr_low + ssr_high
        if ssr < best_ssr:
            best_ssr = ssr
            best_c = float(c)
    if best_c is None:
        raise TvarError(
            f"all {n_candidates} threshold candidates violate the "
            f"{min_share:.0%} regime floor"
        )
    low = s_lag <= best_c
    coef_low, _ = _regime_ols(design[low], targets[low])
    coef_high, _ = _regime_ols(design[~low], targets[~low])
    if months is None:
        month_labels = tuple(f"t{i:04d}" for i in range(t))
    else:
        month_labels = tuple(str(mo) for mo in months)
        if len(month_labels) != t:
            raise TvarError("months must align with y rows")
    return TvarFit(
        n=n,
        threshold=best_c,
        threshold_id=threshold_id,
        mu_low=coef_low[0].copy(),
        phi_low=coef_low[1:].T.copy(),
        mu_high=coef_high[0].copy(),
        phi_high=coef_high[1:].T.copy(),
        ssr=best_ssr,
        low_regime=low,
        threshold_values=s_lag,
        months=month_labels,
        n_candidates=len(candidates),
        n_skipped=skipped,
    )


def label_regimes_tvar(
    fit: TvarFit, rcov: RealizedCovSeries, detector: str = "tvar"
) -> RegimeSeries:
    """Calm/HighVol labels for the threshold fit.

    The regime whose months carry the larger mean realized covariance
    trace is HighVol.  The one burn-in month inherits the first effective
    label; a fit with a single populated regime labels everything Calm
    with a warning (the floor makes this unreachable in practice).
    """
    if len(fit.months) != len(rcov):
        raise TvarError("covariance months do not align with the fitted sample")
    traces = rcov.traces()[1:]  # effective rows start after the lag
    low = fit.low_regime
    if low.all() or (~low).all():
        warnings.warn("single-regime threshold fit, all months labeled Calm",
                      stacklevel=2)
        highvol_eff = np.zeros(len(low), dtype=bool)
    elif traces[low].mean() >= traces[~low].mean():
        highvol_eff = low
    else:
        highvol_eff = ~low
    highvol = np.concatenate([highvol_eff[:1], highvol_eff])
    transition = np.concatenate([[np.nan], fit.threshold_values])
    return RegimeSeries(
        months=fit.months,
        highvol=highvol,
        detector=detector,
        transition=transition,
    )
