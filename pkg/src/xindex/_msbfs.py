"""Bit-parallel multi-source BFS over an undirected CSR graph.

Up to 64*W traversals run at once: every node carries W uint64 words, bit
``s`` of which marks "reached by source s".  One level of expansion is a
bitwise OR over neighbour words, so the cost of a level is proportional to
the number of edges leaving the current frontier times W, independent of
how many of the 64*W sources touched each edge.

Sources are *sets* of seed nodes (a paper's author set), so each traversal
yields distances from the nearest seed.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

_ONE = np.uint64(1)

# per-array budget for the (n_nodes, words) bitsets
_BITSET_BUDGET_BYTES = 32 * 1024 * 1024
MAX_WORDS = 64


def batch_capacity(n_nodes: int) -> int:
    """Number of sources one call to :func:`levels` should handle."""
    words = _BITSET_BUDGET_BYTES // (8 * max(n_nodes, 1))
    words = int(max(1, min(MAX_WORDS, words)))
    return 64 * words


def levels(
    indptr: np.ndarray,
    indices: np.ndarray,
    seeds: Sequence[np.ndarray],
    query_source: np.ndarray,
    query_node: np.ndarray,
    max_depth: int | None = None,
) -> np.ndarray:
    """BFS level at which ``query_node[i]`` is first reached from source ``query_source[i]``.

    Returns an int64 array aligned with the queries; -1 means not reached
    (different component, or deeper than ``max_depth``).  Traversal stops as
    soon as every query is answered.
    """
    n = len(indptr) - 1
    n_src = len(seeds)
    query_source = np.asarray(query_source, dtype=np.int64)
    query_node = np.asarray(query_node, dtype=np.int64)
    result = np.full(len(query_source), -1, dtype=np.int64)
    if n_src == 0 or len(query_source) == 0 or n == 0:
        return result
    words = (n_src + 63) // 64

    seed_rows = np.concatenate([np.asarray(s, dtype=np.int64) for s in seeds])
    seed_cols = np.repeat(np.arange(n_src, dtype=np.int64), [len(s) for s in seeds])
    frontier = np.zeros((n, words), dtype=np.uint64)
    np.bitwise_or.at(frontier, (seed_rows, seed_cols >> 6), _ONE << (seed_cols & 63).astype(np.uint64))
    seen = frontier.copy()
    front_rows = np.unique(seed_rows)

    q_word = query_source >> 6
    q_bit = _ONE << (query_source & 63).astype(np.uint64)
    pending = np.arange(len(query_source))

    deg = np.diff(indptr)
    edge_row = np.repeat(np.arange(n, dtype=np.int64), deg)
    in_front = np.zeros(n, dtype=bool)

    depth = 0
    while True:
        hit = (frontier[query_node[pending], q_word[pending]] & q_bit[pending]) != 0
        result[pending[hit]] = depth
        pending = pending[~hit]
        if pending.size == 0 or front_rows.size == 0:
            break
        if max_depth is not None and depth >= max_depth:
            break

        in_front[front_rows] = True
        mask = in_front[indices]
        in_front[front_rows] = False
        rows = edge_row[mask]
        if rows.size == 0:
            break
        vals = frontier[indices[mask]]
        starts = np.flatnonzero(np.concatenate(([True], rows[1:] != rows[:-1])))
        rows = rows[starts]
        reached = np.bitwise_or.reduceat(vals, starts, axis=0)
        reached &= ~seen[rows]
        keep = reached.any(axis=1)
        rows = rows[keep]
        reached = reached[keep]

        frontier[front_rows] = 0
        frontier[rows] = reached
        seen[rows] |= reached
        front_rows = rows
        depth += 1
    return result
