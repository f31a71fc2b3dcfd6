"""Early-career trajectories split into a small breakout group.

Run: python demos/trajectory_clusters.py
"""
import numpy as np

from xindex.analysis import (
    FEATURE_NAMES,
    best_k,
    cluster_profile,
    enrichment_ratio,
    feature_matrix,
    silhouette_sweep,
    standardize,
)
from xindex.synth import generate_trajectories

series, breakout, flagged = generate_trajectories(n_scholars=2000, seed=0)
F = feature_matrix(series)
sweep = silhouette_sweep(standardize(F), range(2, 11), seed=0)
for k, (score, _) in sorted(sweep.items()):
    print(f"k={k:2d}  silhouette={score:.3f}")
print("best k:", best_k(sweep))

labels = sweep[2][1].labels
print("cluster sizes:", np.bincount(labels), " breakout agreement:", (labels == breakout).mean())
prof = cluster_profile(F, labels)
for i, name in enumerate(FEATURE_NAMES):
    print(f"{name:20s} {prof[0][i]:8.2f} {prof[1][i]:8.2f}")

e = enrichment_ratio({str(i): int(v) for i, v in enumerate(labels)}, {str(i) for i in np.flatnonzero(flagged)})
print(f"flagged share: {e.ratio1:.2%} in cluster 1 vs {e.ratio0:.2%} in cluster 0 -> enrichment {e.enrichment:.1f}")
