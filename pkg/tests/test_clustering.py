import itertools

import numpy as np
import pytest

from xindex.analysis import (
    enrichment_ratio,
    kmeans_cluster,
    silhouette_samples,
    silhouette_score,
    silhouette_sweep,
    standardize,
)
from xindex.analysis.clustering import best_k, inertia


def blobs(rng, n_per=6, dim=11, gap=20.0):
    a = rng.normal(0, 1, (n_per, dim))
    b = rng.normal(0, 1, (n_per, dim)) + gap
    return np.vstack([a, b]), np.repeat([0, 1], n_per)


def exhaustive_best_split(X):
    n = len(X)
    best = (np.inf, None)
    for mask in range(1, 2 ** (n - 1)):
        lab = np.array([(mask >> i) & 1 for i in range(n)])
        best = min(best, (inertia(X, lab), tuple(lab)), key=lambda t: t[0])
    return best


def same_partition(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return all((a[i] == a[j]) == (b[i] == b[j]) for i, j in itertools.combinations(range(len(a)), 2))


def test_blobs_recovered_and_optimal(rng):
    X, truth = blobs(rng)
    res = kmeans_cluster(X, 2, seed=1)
    assert same_partition(res.labels, truth)
    opt, lab = exhaustive_best_split(X)
    assert res.inertia == pytest.approx(opt)
    assert same_partition(res.labels, lab)


@pytest.mark.parametrize("seed", range(15))
def test_kmeans_reaches_exhaustive_optimum_on_small_sets(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 13))
    X = rng.normal(0, 1, (n, 3)) + rng.integers(0, 3, (n, 1)) * 2.5
    opt, _ = exhaustive_best_split(X)
    assert kmeans_cluster(X, 2, seed=seed).inertia == pytest.approx(opt, rel=1e-9)


def test_degenerate_inputs():
    same = np.ones((6, 11))
    assert kmeans_cluster(same, 2).inertia == 0
    X = np.random.default_rng(0).normal(size=(5, 11))
    res = kmeans_cluster(X, 5)
    assert res.inertia == pytest.approx(0) and sorted(res.labels) == [0, 1, 2, 3, 4]
    with pytest.raises(ValueError):
        kmeans_cluster(X, 6)


def test_kmeans_is_seed_deterministic(rng):
    X = rng.normal(size=(200, 11))
    a, b = kmeans_cluster(X, 4, seed=9), kmeans_cluster(X, 4, seed=9)
    assert np.array_equal(a.labels, b.labels) and a.inertia == b.inertia


def test_labels_are_canonical(rng):
    X = np.vstack([rng.normal(0, 0.1, (30, 2)), rng.normal(5, 0.1, (5, 2))])
    # the smaller cluster gets label 1
    assert kmeans_cluster(X, 2).labels[-5:].tolist() == [1] * 5


def test_silhouette_examples(rng):
    X, truth = blobs(rng, n_per=40)
    assert silhouette_score(X, truth) > 0.9
    U = rng.random((200, 2))
    assert abs(silhouette_score(U, rng.integers(0, 2, 200))) < 0.15
    assert silhouette_score(np.array([[0.0], [1.0]]), [0, 1]) == 0


def brute_silhouette(X, labels):
    D = np.sqrt(((X[:, None] - X[None]) ** 2).sum(-1))
    out = []
    for i in range(len(X)):
        own = labels == labels[i]
        if own.sum() == 1:
            out.append(0.0)
            continue
        a = D[i, own].sum() / (own.sum() - 1)
        b = min(D[i, labels == j].mean() for j in set(labels.tolist()) - {labels[i]})
        out.append((b - a) / max(a, b))
    return np.array(out)


def test_silhouette_matches_definition(rng):
    X = rng.normal(size=(57, 4))
    lab = rng.integers(0, 4, 57)
    lab[0] = 3
    lab[1:] = np.where(lab[1:] == 3, 2, lab[1:])  # one singleton cluster
    assert np.allclose(silhouette_samples(X, lab, chunk=10), brute_silhouette(X, lab))


def test_sweep_picks_two_for_two_blobs(rng):
    X, _ = blobs(rng, n_per=50, gap=8.0)
    sweep = silhouette_sweep(standardize(X), range(2, 7), seed=0)
    assert best_k(sweep) == 2


def test_standardize_handles_constant_columns():
    Z = standardize(np.array([[1.0, 5.0], [3.0, 5.0]]))
    assert Z.tolist() == [[-1.0, 0.0], [1.0, 0.0]]


def test_enrichment_examples():
    labels = {f"a{i}": 1 for i in range(10)} | {f"b{i}": 0 for i in range(100)}
    e = enrichment_ratio(labels, {"a0", "a1", "b0"})
    assert (e.ratio1, e.ratio0, e.enrichment) == pytest.approx((0.20, 0.01, 20.0))
    e = enrichment_ratio(labels, {"a0", "b0", "b1", "b2", "b3", "b4", "b5", "b6", "b7", "b8", "b9"})
    assert e.enrichment == pytest.approx(1.0)


def test_enrichment_reported_shape():
    labels = {f"a{i}": 1 for i in range(579)} | {f"b{i}": 0 for i in range(8969)}
    flags = {f"a{i}" for i in range(20)} | {f"b{i}" for i in range(15)}
    e = enrichment_ratio(labels, flags)
    assert round(100 * e.ratio1, 2) == 3.45 and round(100 * e.ratio0, 2) == 0.17
    assert round(e.enrichment, 2) == 20.65


def test_enrichment_errors():
    with pytest.raises(ValueError):
        enrichment_ratio({"a": 1}, set())
    with pytest.raises(ValueError):
        enrichment_ratio({"a": 1, "b": 2}, set())
