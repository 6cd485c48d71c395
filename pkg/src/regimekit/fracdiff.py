"""Fractional differencing with a log-periodogram memory estimate.

The differencing order d of a series is estimated by regressing the log
periodogram on -2*ln(2*sin(freq/2)) over the first floor(sqrt(T)) Fourier
frequencies (the Geweke/Porter-Hudak slope).  The series is then filtered
with the binomial expansion of (1 - L)^d,

    w_0 = 1,   w_k = w_{k-1} * (k - 1 - d) / k,

applied on an expanding window so the output keeps the input's length.
The first min(truncation, T) entries are built from fewer than
``truncation`` weights; callers that care can count them via
``partial_window_count``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class FracDiffError(ValueError):
    pass


@dataclass(frozen=True)
class FracDiffSpec:
    """Estimated differencing recipe for a single instrument."""

    instrument_id: str
    d: float
    bandwidth: int
    truncation: int

    def __post_init__(self):
        if not np.isfinite(self.d):
            raise FracDiffError(f"{self.instrument_id}: non-finite d")
        if self.bandwidth < 2:
            raise FracDiffError(f"{self.instrument_id}: bandwidth must be >= 2")
        if self.truncation < 1:
            raise FracDiffError(f"{self.instrument_id}: truncation must be >= 1")


def estimate_d(
    x: np.ndarray,
    bandwidth: int | None = None,
    truncation: int | None = None,
    instrument_id: str = "",
) -> FracDiffSpec:
    """GPH log-periodogram estimate of the memory parameter d.

    ``bandwidth`` defaults to floor(sqrt(T)); ``truncation`` (recorded in
    the spec, not used by the estimate) defaults to min(1000, T).
    """
    x = np.asarray(x, dtype=float)
    t = len(x)
    if t < 32:
        raise FracDiffError(f"{instrument_id or 'series'}: need at least 32 observations")
    if np.std(x) == 0.0:
        raise FracDiffError(f"{instrument_id or 'series'}: zero variance")
    m = int(np.floor(np.sqrt(t))) if bandwidth is None else int(bandwidth)
    if not 2 <= m <= t // 2:
        raise FracDiffError(f"{instrument_id or 'series'}: bandwidth {m} outside [2, T/2]")
    spectrum = np.fft.rfft(x - x.mean())
    j = np.arange(1, m + 1)
    periodogram = np.abs(spectrum[1 : m + 1]) ** 2 / (2.0 * np.pi * t)
    if np.any(periodogram <= 0.0):
        raise FracDiffError(f"{instrument_id or 'series'}: zero periodogram ordinate")
    freq = 2.0 * np.pi * j / t
    regressor = -2.0 * np.log(2.0 * np.sin(freq / 2.0))
    design = np.column_stack([np.ones(m), regressor])
    coef, *_ = np.linalg.lstsq(design, np.log(periodogram), rcond=None)
    return FracDiffSpec(
        instrument_id=instrument_id,
        d=float(coef[1]),
        bandwidth=m,
        truncation=min(1000, t) if truncation is None else int(truncation),
    )


def fracdiff_weights(d: float, n_weights: int) -> np.ndarray:
    """First ``n_weights`` coefficients of the (1 - L)^d expansion."""
    if not np.isfinite(d):
        raise FracDiffError("non-finite d")
    w = np.empty(n_weights)
    w[0] = 1.0
    for k in range(1, n_weights):
        w[k] = w[k - 1] * (k - 1 - d) / k
    return w


def frac_difference(x: np.ndarray, d: float, truncation: int | None = None) -> np.ndarray:
    """Apply (1 - L)^d to ``x`` with an expanding window; same length out.

    d = 0 returns a copy, d = 1 gives ordinary first differences with the
    first entry equal to x[0] (an empty differencing window).
    """
    x = np.asarray(x, dtype=float)
    t = len(x)
    if t == 0:
        raise FracDiffError("empty series")
    trunc = min(1000, t) if truncation is None else int(truncation)
    if not 1 <= trunc <= t:
        raise FracDiffError(f"truncation {trunc} outside [1, {t}]")
    w = fracdiff_weights(d, trunc)
    return np.convolve(x, w)[:t]


def partial_window_count(length: int, truncation: int | None = None) -> int:
    """How many leading entries of a filtered series used fewer than
    ``truncation`` weights."""
    trunc = min(1000, length) if truncation is None else int(truncation)
    return min(trunc - 1, length)
