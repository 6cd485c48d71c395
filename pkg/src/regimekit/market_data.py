"""Price ingestion and return-panel construction.

Instruments arrive as per-instrument CSV files of (timestamp, price).
They are validated, turned into log returns and inner-joined on
timestamps so that every row of the panel has one return per instrument.
Each row is tagged with its calendar month, which is the grouping key
used downstream when monthly realized covariance matrices are built.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import pandas as pd


class MarketDataError(ValueError):
    """Raised when an input file or a panel violates a data contract."""


@dataclass(frozen=True)
class CsvColumns:
    """Column mapping for a raw price CSV."""

    timestamp: str = "timestamp"
    price: str = "price"


@dataclass(frozen=True)
class PriceSeries:
    """A single instrument's price history.

    Timestamps are tz-aware UTC, strictly increasing and unique;
    prices are strictly positive.
    """

    instrument_id: str
    timestamps: pd.DatetimeIndex
    prices: np.ndarray

    def __post_init__(self):
        if len(self.timestamps) != len(self.prices):
            raise MarketDataError(
                f"{self.instrument_id}: {len(self.timestamps)} timestamps vs "
                f"{len(self.prices)} prices"
            )
        if len(self.timestamps) == 0:
            raise MarketDataError(f"{self.instrument_id}: empty series")
        if self.timestamps.tz is None:
            raise MarketDataError(f"{self.instrument_id}: timestamps must be tz-aware UTC")
        deltas = np.diff(self.timestamps.asi8)
        if np.any(deltas == 0):
            row = int(np.argmin(deltas != 0)) + 1
            raise MarketDataError(
                f"{self.instrument_id}: duplicate timestamp at row {row + 1}"
            )
        if np.any(deltas < 0):
            raise MarketDataError(f"{self.instrument_id}: timestamps not sorted")
        if not np.all(np.isfinite(self.prices)) or np.any(self.prices <= 0):
            bad = np.flatnonzero(~(np.isfinite(self.prices) & (self.prices > 0)))[0]
            raise MarketDataError(
                f"{self.instrument_id}: non-positive or non-finite price at row {bad + 1}"
            )

    def __len__(self) -> int:
        return len(self.prices)


def load_prices(
    path: str | Path,
    columns: CsvColumns = CsvColumns(),
    instrument_id: str | None = None,
) -> PriceSeries:
    """Read one instrument's price CSV into a validated PriceSeries.

    Rows are sorted by timestamp before validation.  Row numbers in error
    messages are 1-based data rows (the header is row 0).
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    frame = pd.read_csv(path, float_precision="round_trip")
    for col in (columns.timestamp, columns.price):
        if col not in frame.columns:
            raise MarketDataError(f"{path.name}: missing column {col!r}")
    ts = pd.to_datetime(frame[columns.timestamp], utc=True, errors="coerce", format="mixed")
    if ts.isna().any():
        row = int(ts.isna().idxmax())
        raise MarketDataError(
            f"{path.name}: unparseable timestamp "
            f"{frame[columns.timestamp].iloc[row]!r} at row {row + 1}"
        )
    prices = pd.to_numeric(frame[columns.price], errors="coerce").to_numpy(dtype=float)
    if np.any(~np.isfinite(prices) | (prices <= 0)):
        row = int(np.flatnonzero(~np.isfinite(prices) | (prices <= 0))[0])
        raise MarketDataError(
            f"{path.name}: non-positive or unparseable price "
            f"{frame[columns.price].iloc[row]!r} at row {row + 1}"
        )
    order = np.argsort(ts.to_numpy(), kind="stable")
    idx = pd.DatetimeIndex(ts.to_numpy()[order])
    if idx.has_duplicates:
        dup = int(np.flatnonzero(idx.duplicated())[0])
        raise MarketDataError(
            f"{path.name}: duplicate timestamp {idx[dup]} at row "
            f"{int(order[dup]) + 1}"
        )
    return PriceSeries(
        instrument_id=instrument_id or path.stem,
        timestamps=idx,
        prices=prices[order],
    )


def log_returns(series: PriceSeries) -> np.ndarray:
    """Log returns ln(p_t / p_{t-1}); output has length len(series) - 1."""
    if len(series) < 2:
        raise MarketDataError(f"{series.instrument_id}: need at least 2 prices")
    return np.diff(np.log(series.prices))


def month_label(ts: pd.Timestamp) -> str:
    return f"{ts.year:04d}-{ts.month:02d}"


@dataclass(frozen=True)
class ReturnPanel:
    """Aligned multi-instrument return matrix.

    ``returns`` is T x N; row t holds the returns realized at
    ``timestamps[t]``.  ``month_index`` assigns each row to a month
    label; labels must be grouped contiguously (monotone in time).
    """

    timestamps: pd.DatetimeIndex
    instruments: tuple[str, ...]
    returns: np.ndarray
    month_index: np.ndarray

    def __post_init__(self):
        # a plain list would make `month_index == label` a scalar False and
        # silently empty every month, so coerce up front
        object.__setattr__(self, "month_index", np.asarray(self.month_index))
        t, n = self.returns.shape
        if len(self.instruments) != n:
            raise MarketDataError("instrument count does not match return columns")
        if n < 2:
            raise MarketDataError("panel needs at least 2 instruments")
        if len(self.timestamps) != t or len(self.month_index) != t:
            raise MarketDataError("timestamps, returns and month_index lengths differ")
        # contiguity: once a month ends it must not reappear
        seen: dict = {}
        prev = None
        for label in self.month_index:
            if label != prev:
                if label in seen:
                    raise MarketDataError(f"month {label} is not contiguous")
                seen[label] = True
                prev = label

    @property
    def months(self) -> tuple[str, ...]:
        out, prev = [], None
        for label in self.month_index:
            if label != prev:
                out.append(label)
                prev = label
        return tuple(out)

    def rows_for_month(self, label: str) -> np.ndarray:
        return self.returns[self.month_index == label]

    def replace(self, **kw) -> "ReturnPanel":
        return dataclasses.replace(self, **kw)


def align_panel(series_list: Sequence[PriceSeries]) -> ReturnPanel:
    """Inner-join instruments on timestamps, then compute log returns.

    Returns are taken after alignment so every gap in any one instrument
    drops the timestamp for all of them.  Row t of the result is the
    return over (timestamps[t-1], timestamps[t]] of the joined grid, and
    is assigned to the calendar month of timestamps[t].
    """
    if len(series_list) < 2:
        raise MarketDataError("need at least 2 instruments to build a panel")
    ids = [s.instrument_id for s in series_list]
    if len(set(ids)) != len(ids):
        raise MarketDataError("duplicate instrument ids")
    common = series_list[0].timestamps
    for s in series_list[1:]:
        common = common.intersection(s.timestamps)
    if len(common) < 2:
        raise MarketDataError("fewer than 2 shared timestamps across instruments")
    cols = []
    for s in series_list:
        pos = s.timestamps.get_indexer(common)
        cols.append(np.diff(np.log(s.prices[pos])))
    ts = common[1:]
    months = np.array([month_label(t) for t in ts])
    return ReturnPanel(
        timestamps=ts,
        instruments=tuple(ids),
        returns=np.column_stack(cols),
        month_index=months,
    )


def panel_to_csv(panel: ReturnPanel, path: str | Path) -> None:
    """Write a panel as CSV: timestamp column plus one return column per instrument."""
    frame = pd.DataFrame(panel.returns, columns=list(panel.instruments))
    frame.insert(0, "timestamp", panel.timestamps.strftime("%Y-%m-%dT%H:%M:%SZ"))
    frame.insert(1, "month", panel.month_index)
    frame.to_csv(path, index=False)


def panel_from_csv(path: str | Path) -> ReturnPanel:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    frame = pd.read_csv(path, float_precision="round_trip")
    if "timestamp" not in frame.columns:
        raise MarketDataError(f"{path.name}: missing column 'timestamp'")
    ts = pd.DatetimeIndex(pd.to_datetime(frame["timestamp"], utc=True))
    if "month" in frame.columns:
        months = frame["month"].astype(str).to_numpy()
        value_cols = [c for c in frame.columns if c not in ("timestamp", "month")]
    else:
        months = np.array([month_label(t) for t in ts])
        value_cols = [c for c in frame.columns if c != "timestamp"]
    returns = frame[value_cols].to_numpy(dtype=float)
    if not np.all(np.isfinite(returns)):
        bad = int(np.flatnonzero(~np.isfinite(returns).all(axis=1))[0])
        raise MarketDataError(f"{path.name}: non-finite return at row {bad + 1}")
    return ReturnPanel(
        timestamps=ts,
        instruments=tuple(value_cols),
        returns=returns,
        month_index=months,
    )
