"""Agglomerative clustering with validation statistics, start to finish."""

import numpy as np

from regimekit import agnes, cut, dunn_index, hopkins, silhouette_values, validate_clustering

rng = np.random.default_rng(5)

# two tight blobs: the easiest possible clustering problem
blobs = np.vstack([
    rng.normal(scale=0.05, size=(20, 2)),
    rng.normal(scale=0.05, size=(20, 2)) + 10.0,
])

dend = agnes(blobs)
print(f"merges: {len(dend.merges)} (always T - 1)")
print(f"last merge height {dend.merges[-1].height:.1f} "
      f"vs second-to-last {dend.merges[-2].height:.3f}")

labels = cut(dend, 2)
print(f"k=2 cut sizes: {np.bincount(labels)[1:]}")

report = validate_clustering(blobs, labels, seed=1)
print(f"hopkins {report.hopkins:.3f} (near 1: strongly clusterable)")
print(f"dunn {report.dunn:.2f} (above 1: separation exceeds diameters)")
print(f"negative silhouettes: {report.negative_silhouette_share:.1%}")

# structureless data for contrast: hopkins falls back toward 0.5
uniform = rng.uniform(size=(500, 2))
print(f"hopkins on uniform points: {hopkins(uniform, seed=99):.3f}")

# deliberately mislabel one point to see its silhouette go negative
bad = labels.copy()
bad[0] = 2
sil = silhouette_values(blobs, bad)
print(f"mislabeled point silhouette: {sil[0]:.3f}")
print(f"dunn after mislabeling: {dunn_index(blobs, bad):.4f}")
