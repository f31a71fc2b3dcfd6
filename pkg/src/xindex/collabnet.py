"""Sliding-window co-authorship networks and their structural statistics."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from typing import Iterator

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

from . import _msbfs
from .corpus import CorpusIndex

DEFAULT_WINDOW = 5
EXACT_PATH_THRESHOLD = 2000


@dataclass(frozen=True, eq=False)
class CollabNetwork:
    """Undirected unit-weight co-authorship graph for the years ``[year-window+1, year]``.

    Nodes are authors indexed densely in sorted author-id order; adjacency is
    stored as symmetric CSR arrays without self-loops or parallel edges.
    """

    year: int
    window: int
    node_ids: tuple[str, ...]
    indptr: np.ndarray
    indices: np.ndarray

    @cached_property
    def node_index(self) -> dict[str, int]:
        return {a: i for i, a in enumerate(self.node_ids)}

    @property
    def n_nodes(self) -> int:
        return len(self.node_ids)

    @property
    def n_edges(self) -> int:
        return len(self.indices) // 2

    @property
    def first_year(self) -> int:
        return self.year - self.window + 1

    def neighbors(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    def degree(self) -> np.ndarray:
        return np.diff(self.indptr)

    def edges(self) -> Iterator[tuple[int, int]]:
        """Each undirected edge once, as ``(i, j)`` with ``i < j``."""
        for i in range(self.n_nodes):
            for j in self.neighbors(i):
                if i < j:
                    yield i, int(j)

    def edge_ids(self) -> list[tuple[str, str]]:
        return [(self.node_ids[i], self.node_ids[j]) for i, j in self.edges()]

    def to_csr(self) -> csr_matrix:
        data = np.ones(len(self.indices), dtype=np.int8)
        return csr_matrix((data, self.indices, self.indptr), shape=(self.n_nodes, self.n_nodes))

    @cached_property
    def component_labels(self) -> np.ndarray:
        """Component id per node; ids are ordered by each component's smallest node index."""
        if self.n_nodes == 0:
            return np.zeros(0, dtype=np.int64)
        _, raw = connected_components(self.to_csr(), directed=False)
        # relabel so that label order follows the minimum member index
        first_seen = {}
        for lab in raw:
            if lab not in first_seen:
                first_seen[lab] = len(first_seen)
        remap = np.array([first_seen[lab] for lab in range(len(first_seen))], dtype=np.int64)
        return remap[raw]


def _from_edges(year: int, window: int, node_ids: list[str], u: np.ndarray, v: np.ndarray) -> CollabNetwork:
    n = len(node_ids)
    if len(u):
        lo, hi = np.minimum(u, v), np.maximum(u, v)
        keep = lo != hi
        codes = np.unique(lo[keep] * n + hi[keep])
        lo, hi = codes // n, codes % n
        rows = np.concatenate([lo, hi])
        cols = np.concatenate([hi, lo])
        order = np.lexsort((cols, rows))
        rows, cols = rows[order], cols[order]
    else:
        rows = cols = np.zeros(0, dtype=np.int64)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=n), out=indptr[1:])
    return CollabNetwork(year, window, tuple(node_ids), indptr, cols.astype(np.int64))


def network_from_edges(edges, nodes=(), year: int = 0, window: int = DEFAULT_WINDOW) -> CollabNetwork:
    """Build a network directly from author-id pairs (plus optional isolated nodes)."""
    node_ids = sorted(set(nodes) | {a for e in edges for a in e})
    idx = {a: i for i, a in enumerate(node_ids)}
    u = np.array([idx[a] for a, _ in edges], dtype=np.int64)
    v = np.array([idx[b] for _, b in edges], dtype=np.int64)
    return _from_edges(year, window, node_ids, u, v)


def build_window_graph(corpus: CorpusIndex, t: int, window: int = DEFAULT_WINDOW) -> CollabNetwork:
    """Co-authorship network of papers published in ``[t-window+1, t]``."""
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    lo = t - window + 1
    in_window = [p.author_ids for p in corpus.papers.values() if lo <= p.year <= t]
    node_ids = sorted({a for authors in in_window for a in authors})
    idx = {a: i for i, a in enumerate(node_ids)}
    us, vs = [], []
    for authors in in_window:
        if len(authors) < 2:
            continue
        ids = [idx[a] for a in authors]
        for a, b in combinations(ids, 2):
            us.append(a)
            vs.append(b)
    return _from_edges(t, window, node_ids, np.array(us, dtype=np.int64), np.array(vs, dtype=np.int64))


def _lcc_indices(net: CollabNetwork) -> np.ndarray:
    if net.n_nodes == 0:
        return np.zeros(0, dtype=np.int64)
    labels = net.component_labels
    sizes = np.bincount(labels)
    # argmax returns the first maximum, i.e. the component with the smallest min index
    return np.flatnonzero(labels == int(np.argmax(sizes)))


def largest_connected_component(net: CollabNetwork) -> frozenset[str]:
    """Author ids of the maximum-cardinality component (ties: smallest minimum node index)."""
    return frozenset(net.node_ids[i] for i in _lcc_indices(net))


@dataclass(frozen=True)
class LccStats:
    year: int
    lcc_size: int
    lcc_edges: int
    avg_degree: float
    avg_shortest_path: float | None
    sample_pairs: int
    n_nodes: int
    n_edges: int
    lcc_nodes: frozenset[str] = frozenset()


def _sampled_mean_path(net: CollabNetwork, lcc: np.ndarray, sample_pairs: int, seed: int) -> float:
    rng = np.random.default_rng(seed)
    m = len(lcc)
    a = rng.integers(0, m, size=sample_pairs)
    b = (a + rng.integers(1, m, size=sample_pairs)) % m
    src, tgt = lcc[a], lcc[b]
    sources, q_src = np.unique(src, return_inverse=True)
    total = 0
    cap = _msbfs.batch_capacity(net.n_nodes)
    for start in range(0, len(sources), cap):
        sel = (q_src >= start) & (q_src < start + cap)
        seeds = [np.array([s]) for s in sources[start:start + cap]]
        d = _msbfs.levels(net.indptr, net.indices, seeds, q_src[sel] - start, tgt[sel])
        if (d < 0).any():
            raise RuntimeError("sampled pair outside the largest component")
        total += int(d.sum())
    return total / sample_pairs


def graph_stats(
    net: CollabNetwork,
    sample_pairs: int = 0,
    seed: int = 0,
    exact_threshold: int = EXACT_PATH_THRESHOLD,
) -> LccStats:
    """Average degree and average shortest path inside the largest component.

    The path average is exact (all pairs) when ``sample_pairs == 0`` or the
    component has at most ``exact_threshold`` nodes, otherwise it is the mean
    over ``sample_pairs`` uniformly drawn node pairs.
    """
    if sample_pairs < 0:
        raise ValueError("sample_pairs must be >= 0")
    lcc = _lcc_indices(net)
    size = len(lcc)
    deg = net.degree()
    lcc_edges = int(deg[lcc].sum()) // 2 if size else 0
    avg_degree = 2 * lcc_edges / size if size else 0.0

    avg_path = None
    used = 0
    if size >= 2:
        if sample_pairs == 0 or size <= exact_threshold:
            sub = net.to_csr()[lcc][:, lcc]
            dist = shortest_path(sub, directed=False, unweighted=True)
            iu = np.triu_indices(size, k=1)
            avg_path = float(dist[iu].mean())
        else:
            avg_path = _sampled_mean_path(net, lcc, sample_pairs, seed)
            used = sample_pairs
    return LccStats(
        year=net.year,
        lcc_size=size,
        lcc_edges=lcc_edges,
        avg_degree=avg_degree,
        avg_shortest_path=avg_path,
        sample_pairs=used,
        n_nodes=net.n_nodes,
        n_edges=net.n_edges,
        lcc_nodes=frozenset(net.node_ids[i] for i in lcc),
    )


def write_edge_list(net: CollabNetwork, fh) -> None:
    """Dump edges as ``author<TAB>author`` lines in lexicographic order."""
    pairs = sorted(tuple(sorted(e)) for e in net.edge_ids())
    for a, b in pairs:
        fh.write(f"{a}\t{b}\n")


def format_stat(value: float | None) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "NA"
    return f"{value:.6f}"
