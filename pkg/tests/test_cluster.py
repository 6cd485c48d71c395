import itertools

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from regimekit import (
    ClusterError,
    RealizedCovSeries,
    agnes,
    cut,
    dunn_index,
    hopkins,
    label_regimes_cluster,
    manhattan_distance,
    silhouette_values,
    validate_clustering,
)


def brute_force_ward(points, metric="manhattan"):
    """Reference agglomeration: recompute every merge cost from scratch.

    W(C) is the mean pairwise base dissimilarity inside C (pairs counted
    once); the cost of merging A and B is 2 * (W(A|B) - W(A) - W(B)).
    Ties break on the lexicographically smallest (min id, max id) pair.
    """
    points = np.asarray(points, dtype=float)
    t = len(points)
    if metric == "manhattan":
        delta = np.abs(points[:, None, :] - points[None, :, :]).sum(axis=2) ** 2
    else:
        delta = ((points[:, None, :] - points[None, :, :]) ** 2).sum(axis=2)

    def w(members):
        if len(members) < 2:
            return 0.0
        return sum(
            delta[i, j] for i, j in itertools.combinations(sorted(members), 2)
        ) / len(members)

    clusters = {i: {i} for i in range(t)}
    merges = []
    next_id = t
    while len(clusters) > 1:
        best = None
        for ia, ib in itertools.combinations(sorted(clusters), 2):
            cost = 2.0 * (
                w(clusters[ia] | clusters[ib]) - w(clusters[ia]) - w(clusters[ib])
            )
            if best is None or cost < best[0]:
                best = (cost, ia, ib)
        cost, ia, ib = best
        merges.append((ia, ib, cost, next_id))
        clusters[next_id] = clusters.pop(ia) | clusters.pop(ib)
        next_id += 1
    return merges


@pytest.mark.parametrize("metric", ["manhattan", "euclidean"])
def test_agnes_matches_brute_force_oracle(metric):
    rng = np.random.default_rng(42)
    for trial in range(200):
        t = int(rng.integers(2, 9))
        pts = rng.normal(size=(t, int(rng.integers(1, 4))))
        dend = agnes(pts, metric=metric)
        expected = brute_force_ward(pts, metric=metric)
        assert len(dend.merges) == len(expected)
        for got, want in zip(dend.merges, expected):
            assert (got.node_a, got.node_b) == (want[0], want[1])
            assert got.new_id == want[3]
            assert abs(got.height - want[2]) <= 1e-10 * max(1.0, abs(want[2]))


def test_agnes_heights_monotone():
    rng = np.random.default_rng(1)
    pts = rng.normal(size=(40, 3))
    dend = agnes(pts)
    heights = [m.height for m in dend.merges]
    assert np.all(np.diff(heights) >= -1e-12)


def test_agnes_rejects_unknown_metric():
    with pytest.raises(ClusterError):
        agnes(np.zeros((3, 2)), metric="cosine")


def test_agnes_needs_two_points():
    with pytest.raises(ClusterError):
        agnes(np.zeros((1, 2)))


def test_cut_produces_k_groups_with_stable_numbering():
    rng = np.random.default_rng(2)
    pts = rng.normal(size=(12, 2))
    dend = agnes(pts)
    labels = cut(dend, 3)
    assert sorted(set(labels)) == [1, 2, 3]
    # cluster 1 contains point 0 by the smallest-member numbering rule
    assert labels[0] == 1
    assert_array_equal(cut(dend, 1), np.ones(12, dtype=labels.dtype))
    assert len(set(cut(dend, 12))) == 12


def test_leaf_order_is_permutation():
    rng = np.random.default_rng(3)
    pts = rng.normal(size=(25, 2))
    order = agnes(pts).leaf_order()
    assert sorted(order) == list(range(25))


def test_manhattan_distance_oracle():
    assert manhattan_distance(np.array([1.0, 2.0]), np.array([4.0, 8.0])) == 9.0


def test_silhouette_oracle_two_pairs():
    pts = np.array([[0.0, 0.0], [0.0, 1.0], [10.0, 0.0], [10.0, 1.0]])
    labels = np.array([1, 1, 2, 2])
    sil = silhouette_values(pts, labels)
    assert_allclose(sil, np.full(4, 19.0 / 21.0), rtol=1e-15)


def test_silhouette_singleton_is_zero():
    pts = np.array([[0.0], [0.1], [5.0]])
    sil = silhouette_values(pts, np.array([1, 1, 2]))
    assert sil[2] == 0.0


def test_dunn_oracle_two_pairs():
    pts = np.array([[0.0, 0.0], [0.0, 1.0], [10.0, 0.0], [10.0, 1.0]])
    assert dunn_index(pts, np.array([1, 1, 2, 2])) == 10.0


def test_dunn_zero_diameter_warns_inf():
    pts = np.array([[0.0, 0.0], [0.0, 0.0], [5.0, 5.0], [5.0, 5.0]])
    with pytest.warns(UserWarning):
        value = dunn_index(pts, np.array([1, 1, 2, 2]))
    assert np.isinf(value)


def test_hopkins_uniform_near_half():
    # data seed and pseudo-point seed must differ or the uniform draws coincide
    meds = []
    for seed in range(100):
        rng = np.random.default_rng(seed)
        pts = rng.uniform(size=(60, 2))
        meds.append(hopkins(pts, seed=10_000 + seed))
    assert abs(float(np.median(meds)) - 0.5) < 0.1


def _two_blobs(seed=0):
    rng = np.random.default_rng(seed)
    a = rng.normal(scale=0.05, size=(20, 2))
    b = rng.normal(scale=0.05, size=(20, 2)) + 10.0
    return np.vstack([a, b]), np.array([1] * 20 + [2] * 20)


def test_two_blob_hopkins_high():
    pts, _ = _two_blobs()
    assert hopkins(pts, seed=0) > 0.8


def test_two_blob_cut_recovers_membership():
    pts, truth = _two_blobs()
    labels = cut(agnes(pts), 2)
    assert_array_equal(labels, truth)
    assert dunn_index(pts, labels) > 1.0


def test_validate_clustering_bundle():
    pts, truth = _two_blobs()
    report = validate_clustering(pts, truth, seed=1)
    assert report.hopkins > 0.8
    assert report.dunn > 1.0
    assert report.negative_silhouette_share == 0.0
    assert len(report.silhouettes) == 40


def _rcov_with_traces(traces):
    mats = np.stack([np.eye(2) * tr / 2.0 for tr in traces])
    months = tuple(f"m{i:02d}" for i in range(len(traces)))
    return RealizedCovSeries(months=months, matrices=mats, instruments=("A", "B"))


def test_label_regimes_cluster_maps_by_trace():
    rcov = _rcov_with_traces([1.0, 1.0, 8.0, 8.0])
    labels = np.array([1, 1, 2, 2])
    regimes = label_regimes_cluster(labels, rcov)
    assert_array_equal(regimes.highvol, [False, False, True, True])
    assert regimes.detector == "agnes"


def test_label_regimes_cluster_tie_prefers_smaller_cluster():
    rcov = _rcov_with_traces([2.0, 2.0, 2.0])
    labels = np.array([1, 1, 2])
    with pytest.warns(UserWarning):
        regimes = label_regimes_cluster(labels, rcov)
    assert_array_equal(regimes.highvol, [False, False, True])


def test_label_regimes_cluster_length_mismatch():
    rcov = _rcov_with_traces([1.0, 2.0])
    with pytest.raises(ClusterError):
        label_regimes_cluster(np.array([1, 2, 1]), rcov)
