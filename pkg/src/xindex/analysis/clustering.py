"""k-means with k-means++ seeding, silhouette scores, and cluster enrichment."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np
from scipy.spatial.distance import cdist

N_INIT = 10
MAX_ITER = 300
K_RANGE = range(2, 11)


def standardize(features: np.ndarray) -> np.ndarray:
    """Column z-scores with population std; constant columns become zeros."""
    X = np.asarray(features, dtype=np.float64)
    mu = X.mean(axis=0)
    sd = X.std(axis=0)
    safe = np.where(sd > 0, sd, 1.0)
    Z = (X - mu) / safe
    Z[:, sd == 0] = 0.0
    return Z


@dataclass(frozen=True)
class KMeansResult:
    labels: np.ndarray
    centers: np.ndarray
    inertia: float
    n_iter: int


def _sq_dists(X: np.ndarray, C: np.ndarray) -> np.ndarray:
    return cdist(X, C, metric="sqeuclidean")


def _plusplus(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = len(X)
    centers = [int(rng.integers(n))]
    closest = _sq_dists(X, X[centers])[:, 0]
    for _ in range(1, k):
        total = closest.sum()
        if total > 0:
            nxt = int(rng.choice(n, p=closest / total))
        else:
            nxt = int(rng.integers(n))
        centers.append(nxt)
        closest = np.minimum(closest, _sq_dists(X, X[[nxt]])[:, 0])
    return X[centers].copy()


def _lloyd(X: np.ndarray, centers: np.ndarray, max_iter: int) -> tuple[np.ndarray, np.ndarray, float, int]:
    k = len(centers)
    labels = None
    XT = np.ascontiguousarray(X.T)
    xx = np.einsum("ij,ij->i", X, X)
    ks = np.arange(k)[:, None]
    for it in range(1, max_iter + 1):
        # |x - c|^2 minus the per-point constant |x|^2, laid out (k, n) so the argmin runs across points
        score = np.einsum("ij,ij->i", centers, centers)[:, None] - 2.0 * (centers @ XT)
        new = score.argmin(axis=0)
        counts = np.bincount(new, minlength=k)
        if (counts == 0).any():
            d = score[new, np.arange(len(X))] + xx
            for j in np.flatnonzero(counts == 0):
                # refill an empty cluster with the point worst served by its centre
                far = int(d.argmax())
                new[far] = j
                d[far] = 0.0
            counts = np.bincount(new, minlength=k)
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        centers = ((labels == ks).astype(np.float64) @ X) / counts[:, None]
    inertia = float(((X - centers[labels]) ** 2).sum())
    return labels, centers, inertia, it


def _canonical(labels: np.ndarray, centers: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Relabel so label 0 is the largest cluster; ties go to the cluster holding the lowest point index."""
    k = len(centers)
    sizes = np.bincount(labels, minlength=k)
    first = np.array([np.flatnonzero(labels == j)[0] if sizes[j] else len(labels) for j in range(k)])
    order = sorted(range(k), key=lambda j: (-sizes[j], first[j]))
    remap = np.empty(k, dtype=np.int64)
    remap[order] = np.arange(k)
    return remap[labels], centers[order]


def kmeans_cluster(features, k: int, seed: int = 0, n_init: int = N_INIT, max_iter: int = MAX_ITER) -> KMeansResult:
    """Best-of-``n_init`` Lloyd k-means.  Labels are ordered by cluster size, so for k=2 label 1 is the smaller cluster."""
    X = np.asarray(features, dtype=np.float64)
    if k < 1:
        raise ValueError("k must be >= 1")
    if len(X) < k:
        raise ValueError(f"cannot form {k} clusters from {len(X)} points")
    best = None
    for restart, child in enumerate(np.random.SeedSequence(seed).spawn(n_init)):
        rng = np.random.default_rng(child)
        labels, centers, inertia, n_iter = _lloyd(X, _plusplus(X, k, rng), max_iter)
        if best is None or inertia < best[2]:
            best = (labels, centers, inertia, n_iter)
    labels, centers = _canonical(best[0], best[1])
    return KMeansResult(labels, centers, best[2], best[3])


def inertia(features, labels) -> float:
    X = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels)
    return float(sum(((X[labels == j] - X[labels == j].mean(axis=0)) ** 2).sum() for j in np.unique(labels)))


def _silhouette_many(X: np.ndarray, labelings: Sequence[np.ndarray], chunk: int) -> list[np.ndarray]:
    # one pass over the pairwise distances serves every labeling
    n = len(X)
    labs, sizes, offsets = [], [], [0]
    for labels in labelings:
        uniq, lab = np.unique(np.asarray(labels), return_inverse=True)
        if len(uniq) < 2:
            raise ValueError("silhouette needs at least two clusters")
        labs.append(lab)
        sizes.append(np.bincount(lab).astype(np.float64))
        offsets.append(offsets[-1] + len(uniq))
    onehot = np.zeros((n, offsets[-1]))
    for lab, off in zip(labs, offsets):
        onehot[np.arange(n), off + lab] = 1.0
    outs = [np.zeros(n) for _ in labs]
    for s in range(0, n, chunk):
        all_sums = cdist(X[s:s + chunk], X) @ onehot
        rows = np.arange(all_sums.shape[0])
        for lab, size, off, out in zip(labs, sizes, offsets, outs):
            sums = all_sums[:, off:off + len(size)]
            own = lab[s:s + chunk]
            own_size = size[own]
            with np.errstate(invalid="ignore", divide="ignore"):
                a = sums[rows, own] / (own_size - 1)
                means = sums / size
            means[rows, own] = np.inf
            b = means.min(axis=1)
            denom = np.maximum(a, b)
            with np.errstate(invalid="ignore", divide="ignore"):
                sil = np.where(denom > 0, (b - a) / denom, 0.0)
            sil[own_size == 1] = 0.0
            out[s:s + chunk] = sil
    return outs


def silhouette_samples(features, labels, chunk: int = 1024) -> np.ndarray:
    return _silhouette_many(np.asarray(features, dtype=np.float64), [labels], chunk)[0]


def silhouette_score(features, labels) -> float:
    """Mean silhouette (Euclidean); points in singleton clusters score 0."""
    return float(silhouette_samples(features, labels).mean())


def silhouette_sweep(features, k_values: Iterable[int] = K_RANGE, seed: int = 0) -> dict[int, tuple[float, KMeansResult]]:
    X = np.asarray(features, dtype=np.float64)
    results = {k: kmeans_cluster(X, k, seed=seed) for k in k_values}
    scores = _silhouette_many(X, [r.labels for r in results.values()], chunk=512)
    return {k: (float(sc.mean()), r) for (k, r), sc in zip(results.items(), scores)}


def best_k(sweep: Mapping[int, tuple[float, KMeansResult]]) -> int:
    return max(sorted(sweep), key=lambda k: sweep[k][0])


class Enrichment(NamedTuple):
    ratio1: float
    ratio0: float
    enrichment: float
    count1: int
    flagged1: int
    count0: int
    flagged0: int


def enrichment_ratio(labels: Mapping[str, int], flag_set: Iterable[str]) -> Enrichment:
    """Share of flagged scholars in cluster 1 over the share in cluster 0."""
    flags = set(flag_set)
    values = set(labels.values())
    if not values <= {0, 1}:
        raise ValueError(f"expected two clusters labelled 0/1, got {sorted(values)}")
    count = [0, 0]
    flagged = [0, 0]
    for a, lab in labels.items():
        count[lab] += 1
        flagged[lab] += a in flags
    if 0 in count:
        raise ValueError("empty cluster")
    r1, r0 = flagged[1] / count[1], flagged[0] / count[0]
    if r0 == 0:
        enr = math.inf if r1 > 0 else math.nan
    else:
        enr = r1 / r0
    return Enrichment(r1, r0, enr, count[1], flagged[1], count[0], flagged[0])


def cluster_profile(features: np.ndarray, labels: Sequence[int]) -> dict[int, np.ndarray]:
    """Mean raw feature vector per cluster label."""
    X = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels)
    return {int(j): X[labels == j].mean(axis=0) for j in np.unique(labels)}
