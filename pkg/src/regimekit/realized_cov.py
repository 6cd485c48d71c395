"""Monthly realized covariance matrices and the correlation-based metric.

Within each month m the realized covariance is the sum of return outer
products, RCov_m = sum_t r_t r_t'.  Matrices are symmetrized, checked
for positive semi-definiteness (tiny negative eigenvalues above -1e-10
are clipped to zero, anything below that is an error) and can be reduced
to correlation form and to the dissimilarity metric d_ij = 1 - rho_ij^2
used by the clustering detector.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .market_data import ReturnPanel

PSD_TOL = -1e-10


class CovarianceError(ValueError):
    pass


def _repair_psd(mat: np.ndarray, context: str) -> np.ndarray:
    vals, vecs = np.linalg.eigh(mat)
    if vals[0] < PSD_TOL:
        raise CovarianceError(
            f"{context}: eigenvalue {vals[0]:.3e} below tolerance {PSD_TOL:.0e}"
        )
    if vals[0] < 0.0:
        vals = np.clip(vals, 0.0, None)
        mat = (vecs * vals) @ vecs.T
        mat = 0.5 * (mat + mat.T)
    return mat


@dataclass(frozen=True)
class RealizedCovSeries:
    """One covariance matrix per month, stacked as a T x N x N array."""

    months: tuple[str, ...]
    matrices: np.ndarray
    instruments: tuple[str, ...]

    def __post_init__(self):
        t, n, n2 = self.matrices.shape
        if n != n2 or n != len(self.instruments):
            raise CovarianceError("matrix block does not match instrument count")
        if t != len(self.months):
            raise CovarianceError("month labels do not match matrix count")

    def __len__(self) -> int:
        return len(self.months)

    def traces(self) -> np.ndarray:
        return np.trace(self.matrices, axis1=1, axis2=2)


def realized_covariance(
    panel: ReturnPanel,
    min_rows: int | None = None,
    scale_by_rows: bool = False,
) -> RealizedCovSeries:
    """Aggregate a return panel into monthly realized covariance matrices.

    Months with fewer than ``min_rows`` observations (default N + 1) are
    skipped with a warning.  ``scale_by_rows`` divides each matrix by its
    month's row count, turning the sum of outer products into a per-period
    average; the default keeps the plain sum.
    """
    n = len(panel.instruments)
    floor = n + 1 if min_rows is None else int(min_rows)
    months, mats = [], []
    for label in panel.months:
        rows = panel.rows_for_month(label)
        if len(rows) < floor:
            warnings.warn(
                f"month {label}: {len(rows)} rows < {floor}, skipped", stacklevel=2
            )
            continue
        mat = rows.T @ rows
        if scale_by_rows:
            mat = mat / len(rows)
        mat = 0.5 * (mat + mat.T)
        mats.append(_repair_psd(mat, f"month {label}"))
        months.append(label)
    if not months:
        raise CovarianceError("no month reached the minimum row count")
    return RealizedCovSeries(
        months=tuple(months),
        matrices=np.stack(mats),
        instruments=panel.instruments,
    )


def to_correlation(cov: np.ndarray) -> np.ndarray:
    """Correlation matrix from a covariance matrix; entries clamped to [-1, 1]."""
    cov = np.asarray(cov, dtype=float)
    diag = np.diag(cov)
    if np.any(diag <= 0.0):
        bad = int(np.flatnonzero(diag <= 0.0)[0])
        raise CovarianceError(f"non-positive variance on diagonal entry {bad}")
    scale = 1.0 / np.sqrt(diag)
    corr = cov * scale[:, None] * scale[None, :]
    corr = np.clip(corr, -1.0, 1.0)
    np.fill_diagonal(corr, 1.0)
    return corr


def to_metric(corr: np.ndarray) -> np.ndarray:
    """Dissimilarity d_ij = 1 - rho_ij^2; zero diagonal, entries in [0, 1]."""
    corr = np.asarray(corr, dtype=float)
    if np.any(np.abs(np.diag(corr) - 1.0) > 1e-8):
        raise CovarianceError("correlation matrix must have unit diagonal")
    if np.any(np.abs(corr) > 1.0 + 1e-8):
        raise CovarianceError("correlation entries must lie in [-1, 1]")
    metric = 1.0 - np.clip(corr, -1.0, 1.0) ** 2
    np.fill_diagonal(metric, 0.0)
    return metric


def vech_indices(n: int, strict: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """(row, col) index arrays of the lower triangle stacked column by column."""
    rows, cols = [], []
    for j in range(n):
        for i in range(j + 1 if strict else j, n):
            rows.append(i)
            cols.append(j)
    return np.array(rows, dtype=int), np.array(cols, dtype=int)


def vech(mat: np.ndarray, strict: bool = False) -> np.ndarray:
    """Half-vectorize a symmetric matrix (lower triangle, column-major).

    ``strict=True`` drops the diagonal, which is what the metric pipeline
    uses since d_ii is identically zero there.
    """
    mat = np.asarray(mat, dtype=float)
    n = mat.shape[0]
    if mat.shape != (n, n):
        raise CovarianceError("vech needs a square matrix")
    if np.max(np.abs(mat - mat.T)) > 1e-12:
        raise CovarianceError("vech needs a symmetric matrix")
    rows, cols = vech_indices(n, strict=strict)
    return mat[rows, cols]


def unvech(v: np.ndarray, strict: bool = False) -> np.ndarray:
    """Rebuild the symmetric matrix behind a vech vector."""
    v = np.asarray(v, dtype=float)
    m = len(v)
    if strict:
        n = int(round((1.0 + np.sqrt(1.0 + 8.0 * m)) / 2.0))
        expect = n * (n - 1) // 2
    else:
        n = int(round((np.sqrt(8.0 * m + 1.0) - 1.0) / 2.0))
        expect = n * (n + 1) // 2
    if expect != m:
        raise CovarianceError(f"vector length {m} is not a vech length")
    out = np.zeros((n, n))
    rows, cols = vech_indices(n, strict=strict)
    out[rows, cols] = v
    out[cols, rows] = v
    return out


def vech_names(instruments: tuple[str, ...], strict: bool = False) -> list[str]:
    """Column names matching the vech ordering, e.g. 'ES~NQ'."""
    rows, cols = vech_indices(len(instruments), strict=strict)
    return [f"{instruments[i]}~{instruments[j]}" for i, j in zip(rows, cols)]


def metric_panel(rcov: RealizedCovSeries, strict: bool = True) -> np.ndarray:
    """Stack vech(1 - corr^2) rows for every month (strict excludes the
    constant-zero diagonal)."""
    rows = [vech(to_metric(to_correlation(m)), strict=strict) for m in rcov.matrices]
    return np.vstack(rows)


def cov_panel(rcov: RealizedCovSeries) -> np.ndarray:
    """Stack vech(RCov) rows for every month."""
    return np.vstack([vech(m) for m in rcov.matrices])
