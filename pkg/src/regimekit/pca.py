"""Column standardization and covariance-eigendecomposition PCA.

Loadings come from the eigenvectors of the sample covariance matrix,
ordered by descending eigenvalue, with a deterministic sign convention:
the entry of largest magnitude in each loading vector is made positive.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


class PcaError(ValueError):
    pass


def standardize(
    panel: np.ndarray, names: Sequence[str] | None = None
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Center each column and divide by its sample standard deviation (ddof=1).

    Returns (standardized, means, scales).  A zero-variance column is an
    error naming the column.
    """
    x = np.asarray(panel, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2:
        raise PcaError("standardize needs a 2-d array with at least 2 rows")
    means = x.mean(axis=0)
    scales = x.std(axis=0, ddof=1)
    dead = np.flatnonzero(scales == 0.0)
    if dead.size:
        j = int(dead[0])
        label = names[j] if names is not None else f"column {j}"
        raise PcaError(f"zero variance in {label}")
    return (x - means) / scales, means, scales


@dataclass(frozen=True)
class PCAModel:
    loadings: np.ndarray  # p x k, orthonormal columns
    explained_variance: np.ndarray  # all p eigenvalues, descending
    explained_variance_ratio: np.ndarray
    means: np.ndarray
    scales: np.ndarray
    scores: np.ndarray  # T x k

    @property
    def k(self) -> int:
        return self.loadings.shape[1]

    def cumulative_variance(self, k: int | None = None) -> float:
        k = self.k if k is None else k
        return float(self.explained_variance_ratio[:k].sum())

    def transform(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return ((x - self.means) / self.scales) @ self.loadings


def fit_pca(panel: np.ndarray, k: int, scale: bool = False) -> PCAModel:
    """Principal components of a T x p panel via eigendecomposition.

    ``scale=True`` standardizes columns first (the metric pipeline);
    otherwise columns are only centered (the covariance pipeline).
    """
    x = np.asarray(panel, dtype=float)
    if x.ndim != 2:
        raise PcaError("fit_pca needs a 2-d array")
    t, p = x.shape
    if t < 3:
        raise PcaError("fit_pca needs at least 3 rows")
    if not 1 <= k <= p:
        raise PcaError(f"k={k} outside [1, {p}]")
    means = x.mean(axis=0)
    if scale:
        centered, means, scales = standardize(x)
    else:
        centered = x - means
        scales = np.ones(p)
    cov = centered.T @ centered / (t - 1)
    vals, vecs = np.linalg.eigh(cov)
    order = np.argsort(vals)[::-1]
    vals = np.clip(vals[order], 0.0, None)
    vecs = vecs[:, order]
    for j in range(p):
        pivot = int(np.argmax(np.abs(vecs[:, j])))
        if vecs[pivot, j] < 0.0:
            vecs[:, j] = -vecs[:, j]
    total = vals.sum()
    if total <= 0.0:
        raise PcaError("panel has no variance")
    loadings = vecs[:, :k]
    return PCAModel(
        loadings=loadings,
        explained_variance=vals,
        explained_variance_ratio=vals / total,
        means=means,
        scales=scales,
        scores=centered @ loadings,
    )
