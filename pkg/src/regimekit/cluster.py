"""Agglomerative clustering of monthly feature vectors, Ward linkage on
Manhattan dissimilarities, plus the cluster-quality diagnostics used to
sanity-check the two-regime structure (Hopkins statistic, silhouettes,
Dunn index).

Ward's criterion is run on squared Manhattan distances through the
Lance-Williams recurrence

    D(A+B, C) = [(nA+nC) D(A,C) + (nB+nC) D(B,C) - nC D(A,B)] / (nA+nB+nC)

which keeps every merge height equal to the increase in within-cluster
dispersion (times two) that the merge causes.  All tie-breaks are
deterministic: the candidate pair with the smallest (min id, max id) wins,
node ids number leaves 0..T-1 and new clusters T, T+1, ... in merge order.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .realized_cov import RealizedCovSeries
from .regimes import RegimeSeries


class ClusterError(ValueError):
    pass


def manhattan_distance(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ClusterError(f"length mismatch: {a.shape} vs {b.shape}")
    return float(np.abs(a - b).sum())


class Merge(NamedTuple):
    node_a: int
    node_b: int
    height: float
    new_id: int


@dataclass(frozen=True)
class Dendrogram:
    merges: tuple[Merge, ...]
    leaf_count: int

    def __post_init__(self):
        if len(self.merges) != self.leaf_count - 1:
            raise ClusterError("a full dendrogram has leaf_count - 1 merges")
        heights = [m.height for m in self.merges]
        if any(b < a - 1e-9 for a, b in zip(heights, heights[1:])):
            raise ClusterError("merge heights must be monotone non-decreasing")

    def leaf_order(self) -> list[int]:
        """Left-to-right leaf ordering implied by the merge tree."""
        children = {m.new_id: (m.node_a, m.node_b) for m in self.merges}
        order: list[int] = []
        stack = [self.merges[-1].new_id] if self.merges else [0]
        while stack:
            node = stack.pop()
            if node < self.leaf_count:
                order.append(node)
            else:
                a, b = children[node]
                stack.append(b)
                stack.append(a)
        return order


def agnes(points: np.ndarray, metric: str = "manhattan") -> Dendrogram:
    """Bottom-up Ward clustering of the rows of ``points``.

    Base dissimilarities are squared Manhattan distances by default
    (``metric="euclidean"`` selects squared Euclidean, the textbook Ward
    geometry); merge heights are the Ward cost of each merge on that
    scale.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[0] < 2:
        raise ClusterError("agnes needs at least 2 points")
    if metric == "manhattan":
        dist = squareform(pdist(points, metric="cityblock")) ** 2
    elif metric == "euclidean":
        dist = squareform(pdist(points, metric="sqeuclidean"))
    else:
        raise ClusterError(f"unknown base metric {metric!r}")
    return _agnes_from_dissimilarity(dist)


def _agnes_from_dissimilarity(dist: np.ndarray) -> Dendrogram:
    t = dist.shape[0]
    d = dist.astype(float).copy()
    np.fill_diagonal(d, np.inf)
    active = np.ones(t, dtype=bool)
    node_id = np.arange(t)
    size = np.ones(t, dtype=int)
    merges: list[Merge] = []
    next_id = t
    for _ in range(t - 1):
        sub = np.where(active)[0]
        block = d[np.ix_(sub, sub)]
        best = block.min()
        ii, jj = np.where(block == best)
        pairs = []
        for a, b in zip(sub[ii], sub[jj]):
            if a < b:
                ids = (int(min(node_id[a], node_id[b])), int(max(node_id[a], node_id[b])))
                pairs.append((ids, a, b))
        pairs.sort(key=lambda item: item[0])
        (id_a, id_b), slot_a, slot_b = pairs[0]
        na, nb = size[slot_a], size[slot_b]
        merges.append(Merge(id_a, id_b, float(best), next_id))
        # Lance-Williams update for Ward; the merged cluster reuses slot_a
        for c in sub:
            if c == slot_a or c == slot_b:
                continue
            nc = size[c]
            d[slot_a, c] = d[c, slot_a] = (
                (na + nc) * d[slot_a, c] + (nb + nc) * d[slot_b, c] - nc * best
            ) / (na + nb + nc)
        active[slot_b] = False
        size[slot_a] = na + nb
        node_id[slot_a] = next_id
        next_id += 1
    return Dendrogram(merges=tuple(merges), leaf_count=t)


def cut(dendrogram: Dendrogram, k: int) -> np.ndarray:
    """Cluster labels 1..k from stopping the merge sequence early.

    Applies the first leaf_count - k merges; clusters are numbered by
    their smallest member index.
    """
    t = dendrogram.leaf_count
    if not 1 <= k <= t:
        raise ClusterError(f"k={k} outside [1, {t}]")
    parent = list(range(t + len(dendrogram.merges)))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for m in dendrogram.merges[: t - k]:
        parent[find(m.node_a)] = m.new_id
        parent[find(m.node_b)] = m.new_id
    roots = [find(i) for i in range(t)]
    first_member: dict[int, int] = {}
    for i, r in enumerate(roots):
        first_member.setdefault(r, i)
    ranked = sorted(first_member, key=first_member.get)
    relabel = {r: rank + 1 for rank, r in enumerate(ranked)}
    return np.array([relabel[r] for r in roots], dtype=int)


def hopkins(
    points: np.ndarray, sample_size: int | None = None, seed: int = 0
) -> float:
    """Hopkins clustering-tendency statistic with Manhattan distances.

    Compares nearest-neighbour distances of uniform pseudo-points drawn
    over the data's bounding box against those of sampled real points;
    values near 0.5 indicate no structure, near 1 strong clustering.
    """
    from scipy.spatial import cKDTree

    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[0] < 3:
        raise ClusterError("hopkins needs at least 3 points")
    t = points.shape[0]
    lo = points.min(axis=0)
    hi = points.max(axis=0)
    if np.any(hi - lo == 0.0):
        raise ClusterError("degenerate bounding box (zero volume)")
    m = min(t - 1, max(1, int(np.floor(0.1 * t)))) if sample_size is None else int(sample_size)
    if not 1 <= m <= t - 1:
        raise ClusterError(f"sample_size {m} outside [1, {t - 1}]")
    rng = np.random.default_rng(seed)
    tree = cKDTree(points)
    pseudo = rng.uniform(lo, hi, size=(m, points.shape[1]))
    u_dist, _ = tree.query(pseudo, k=1, p=1)
    chosen = rng.choice(t, size=m, replace=False)
    w_dist, _ = tree.query(points[chosen], k=2, p=1)
    w_dist = w_dist[:, 1]  # first hit is the point itself
    denom = u_dist.sum() + w_dist.sum()
    if denom == 0.0:
        raise ClusterError("all nearest-neighbour distances are zero")
    return float(u_dist.sum() / denom)


def silhouette_values(points: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Per-point silhouette widths under Manhattan distance.

    Singleton clusters get silhouette 0 by convention.
    """
    points = np.asarray(points, dtype=float)
    labels = np.asarray(labels)
    if len(points) != len(labels):
        raise ClusterError("labels length does not match points")
    uniq = np.unique(labels)
    if len(uniq) < 2:
        raise ClusterError("silhouette needs at least 2 clusters")
    d = squareform(pdist(points, metric="cityblock"))
    out = np.zeros(len(points))
    masks = {c: labels == c for c in uniq}
    for i in range(len(points)):
        own = masks[labels[i]]
        n_own = own.sum()
        if n_own == 1:
            out[i] = 0.0
            continue
        a = d[i, own].sum() / (n_own - 1)
        b = min(d[i, masks[c]].mean() for c in uniq if c != labels[i])
        top = max(a, b)
        out[i] = 0.0 if top == 0.0 else (b - a) / top
    return out


def dunn_index(points: np.ndarray, labels: np.ndarray) -> float:
    """Minimum between-cluster distance over maximum cluster diameter
    (point-to-point, Manhattan).  All-singleton clusterings have zero
    diameter and return +inf with a warning.
    """
    points = np.asarray(points, dtype=float)
    labels = np.asarray(labels)
    uniq = np.unique(labels)
    if len(uniq) < 2:
        raise ClusterError("dunn index needs at least 2 clusters")
    d = squareform(pdist(points, metric="cityblock"))
    same = labels[:, None] == labels[None, :]
    off = ~np.eye(len(points), dtype=bool)
    intra = d[same & off]
    inter = d[~same]
    diameter = intra.max() if intra.size else 0.0
    if diameter == 0.0:
        warnings.warn("zero cluster diameter, Dunn index is infinite", stacklevel=2)
        return float("inf")
    return float(inter.min() / diameter)


@dataclass(frozen=True)
class ClusterValidation:
    hopkins: float
    silhouettes: np.ndarray
    negative_silhouette_share: float
    dunn: float


def validate_clustering(
    points: np.ndarray,
    labels: np.ndarray,
    seed: int = 0,
    sample_size: int | None = None,
) -> ClusterValidation:
    sil = silhouette_values(points, labels)
    return ClusterValidation(
        hopkins=hopkins(points, sample_size=sample_size, seed=seed),
        silhouettes=sil,
        negative_silhouette_share=float(np.mean(sil < 0.0)),
        dunn=dunn_index(points, labels),
    )


def label_regimes_cluster(
    labels: np.ndarray, rcov: RealizedCovSeries, detector: str = "agnes"
) -> RegimeSeries:
    """Map a 2-cluster labeling to Calm/HighVol by average covariance trace.

    The cluster whose months have the larger mean realized variance
    (trace of RCov) is HighVol; on an exact tie the smaller cluster is
    HighVol and a warning is issued.
    """
    labels = np.asarray(labels)
    if len(labels) != len(rcov):
        raise ClusterError("labels length does not match covariance months")
    uniq = np.unique(labels)
    if len(uniq) != 2:
        raise ClusterError(f"regime mapping needs exactly 2 clusters, got {len(uniq)}")
    traces = rcov.traces()
    mean_a = traces[labels == uniq[0]].mean()
    mean_b = traces[labels == uniq[1]].mean()
    if mean_a == mean_b:
        warnings.warn("trace tie between clusters, smaller cluster set to HighVol",
                      stacklevel=2)
        sizes = [(labels == c).sum() for c in uniq]
        high = uniq[int(np.argmin(sizes))]
    else:
        high = uniq[0] if mean_a > mean_b else uniq[1]
    return RegimeSeries(
        months=rcov.months,
        highvol=labels == high,
        detector=detector,
    )
