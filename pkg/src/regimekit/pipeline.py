"""End-to-end wiring from monthly covariances to regime labels and scores.

The three detectors share their feature construction: PCA scores of the
raw covariance panel for the regression models, PCA scores of the
standardized correlation-distance panel for clustering.  The functions
here exist so the command-line driver, the evaluation harness and the
tests all run the exact same plumbing.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .cluster import (
    ClusterValidation,
    Dendrogram,
    agnes,
    cut,
    label_regimes_cluster,
    validate_clustering,
)
from .pca import PCAModel, fit_pca, standardize
from .realized_cov import RealizedCovSeries, cov_panel, metric_panel, realized_covariance
from .regimes import RegimeSeries
from .synthetic import ConfusionMatrix, SyntheticDataset, score, to_monthly_panel
from .tvar import TvarFit, fit_tvar, label_regimes_tvar
from .vlstar import (
    VlstarFit,
    fit_vlstar,
    label_regimes,
    linearity_test,
    select_transition,
)


def transition_candidates(scores: np.ndarray) -> dict[str, np.ndarray]:
    """Candidate transition variables: a linear trend and the first lag
    of each retained component score.  Lagged series carry NaN in row 0."""
    scores = np.asarray(scores, dtype=float)
    t = len(scores)
    cands: dict[str, np.ndarray] = {"trend": np.arange(t, dtype=float)}
    for j in range(scores.shape[1]):
        cands[f"pc{j + 1}_lag1"] = np.concatenate([[np.nan], scores[:-1, j]])
    return cands


class VlstarDetection(NamedTuple):
    regimes: RegimeSeries
    fit: VlstarFit
    pca: PCAModel


class ClusterDetection(NamedTuple):
    regimes: RegimeSeries
    labels: np.ndarray
    dendrogram: Dendrogram
    scores: np.ndarray
    validation: ClusterValidation


class TvarDetection(NamedTuple):
    regimes: RegimeSeries
    fit: TvarFit
    pca: PCAModel


def detect_vlstar(
    rcov: RealizedCovSeries, k: int = 3, p: int = 1, **fit_kwargs
) -> VlstarDetection:
    """Smooth-transition detector on covariance-panel component scores."""
    model = fit_pca(cov_panel(rcov), k=k)
    cands = transition_candidates(model.scores)
    fit = fit_vlstar(model.scores, cands, p=p, months=rcov.months, **fit_kwargs)
    return VlstarDetection(label_regimes(fit), fit, model)


def detect_cluster(
    rcov: RealizedCovSeries,
    k: int = 3,
    n_clusters: int = 2,
    metric: str = "manhattan",
    validation_seed: int = 0,
) -> ClusterDetection:
    """Hierarchical detector on standardized correlation-distance scores."""
    std, _, _ = standardize(metric_panel(rcov))
    model = fit_pca(std, k=k)
    dend = agnes(model.scores, metric=metric)
    labels = cut(dend, n_clusters)
    regimes = label_regimes_cluster(labels, rcov)
    validation = validate_clustering(model.scores, labels, seed=validation_seed)
    return ClusterDetection(regimes, labels, dend, model.scores, validation)


def detect_tvar(rcov: RealizedCovSeries, k: int = 3, p: int = 1) -> TvarDetection:
    """Threshold-VAR baseline.

    The threshold variable is the same transition candidate the linearity
    test selects for the smooth-transition model; the fit then applies its
    own one-period delay to that series.  The lagged candidates carry NaN
    in row 0, backfilled with the first finite value so the grid has a
    complete series to threshold.
    """
    model = fit_pca(cov_panel(rcov), k=k)
    cands = transition_candidates(model.scores)
    best = select_transition(linearity_test(model.scores, cands, p=p))
    series = cands[best.candidate_id].copy()
    if not np.isfinite(series[0]):
        series[0] = series[1]
    fit = fit_tvar(
        model.scores, series, threshold_id=best.candidate_id, months=rcov.months
    )
    return TvarDetection(label_regimes_tvar(fit, rcov), fit, model)


def expand_monthly(regimes: RegimeSeries, month_length: int) -> np.ndarray:
    """Broadcast each month's label to its `month_length` rows."""
    if month_length < 1:
        raise ValueError("month_length must be >= 1")
    return np.repeat(regimes.highvol, month_length)


def evaluate_detectors(
    dataset: SyntheticDataset,
    month_length: int = 21,
    k: int = 3,
) -> dict[str, ConfusionMatrix]:
    """Score all three detectors against the generator's row-level truth.

    Monthly labels are broadcast back to rows so predictions and truth
    compare at the resolution the truth is defined on; trailing rows not
    covered by a full month are dropped on both sides.
    """
    panel = to_monthly_panel(dataset, month_length=month_length)
    rcov = realized_covariance(panel)
    usable = len(rcov) * month_length
    truth = dataset.true_regime[:usable]
    outcomes = {
        "vlstar": detect_vlstar(rcov, k=k),
        "cluster": detect_cluster(rcov, k=k),
        "tvar": detect_tvar(rcov, k=k),
    }
    return {
        name: score(expand_monthly(out.regimes, month_length), truth)
        for name, out in outcomes.items()
    }
