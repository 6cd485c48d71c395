"""Shared regime-label container used by every detector."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

CALM = "Calm"
HIGHVOL = "HighVol"


@dataclass(frozen=True)
class RegimeSeries:
    """Per-month Calm/HighVol labels from one detector.

    ``transition`` carries the detector's transition-variable value for
    each month when it has one (NaN where it does not, e.g. the lag
    burn-in months).
    """

    months: tuple[str, ...]
    highvol: np.ndarray
    detector: str
    transition: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        hv = np.asarray(self.highvol, dtype=bool)
        object.__setattr__(self, "highvol", hv)
        if len(self.months) != len(hv):
            raise ValueError("months and labels have different lengths")
        if len(self.months) != len(set(self.months)):
            raise ValueError("duplicate month labels")
        if self.transition is None:
            object.__setattr__(self, "transition", np.full(len(hv), np.nan))
        else:
            tr = np.asarray(self.transition, dtype=float)
            if len(tr) != len(hv):
                raise ValueError("transition length does not match months")
            object.__setattr__(self, "transition", tr)

    def __len__(self) -> int:
        return len(self.months)

    @property
    def labels(self) -> np.ndarray:
        return np.where(self.highvol, HIGHVOL, CALM)

    def highvol_share(self) -> float:
        return float(np.mean(self.highvol)) if len(self) else 0.0

    def to_csv(self, path: str | Path) -> None:
        pd.DataFrame(
            {"month": self.months, "regime": self.labels, "transition": self.transition}
        ).to_csv(path, index=False)

    @classmethod
    def from_csv(cls, path: str | Path, detector: str = "") -> "RegimeSeries":
        frame = pd.read_csv(Path(path))
        for col in ("month", "regime"):
            if col not in frame.columns:
                raise ValueError(f"{Path(path).name}: missing column {col!r}")
        labels = frame["regime"].astype(str).to_numpy()
        bad = ~np.isin(labels, [CALM, HIGHVOL])
        if bad.any():
            row = int(np.flatnonzero(bad)[0])
            raise ValueError(
                f"{Path(path).name}: unknown regime {labels[row]!r} at row {row + 1}"
            )
        transition = (
            frame["transition"].to_numpy(dtype=float)
            if "transition" in frame.columns
            else None
        )
        return cls(
            months=tuple(frame["month"].astype(str)),
            highvol=labels == HIGHVOL,
            detector=detector or "unknown",
            transition=transition,
        )
