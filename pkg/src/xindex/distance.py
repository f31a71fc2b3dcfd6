"""Citation distances on the citing year's collaboration network, and the yearly average distance."""
from __future__ import annotations

import logging
import math
import os
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import _msbfs
from .collabnet import CollabNetwork, largest_connected_component
from .corpus import CorpusIndex

log = logging.getLogger(__name__)

INFINITE = math.inf
# integer code for an infinite distance inside DistanceTable arrays
INF_CODE = -1


class DistanceUndefined(ValueError):
    """No valid citation pairs to average for a year."""


@dataclass(frozen=True, slots=True)
class CitationDistanceRecord:
    cited_paper_id: str
    citing_paper_id: str
    citing_year: int
    distance: float | int
    # True when the traversal hit the depth cap: ``distance`` is then a lower bound
    capped: bool = False


def format_distance(distance, capped: bool = False) -> str:
    if capped:
        return f">={int(distance)}"
    if distance == INFINITE:
        return "inf"
    return str(int(distance))


def parse_distance(text: str) -> tuple[float | int, bool]:
    text = text.strip()
    if text == "inf":
        return INFINITE, False
    if text.startswith(">="):
        return int(text[2:]), True
    return int(text), False


def paper_pair_distance(net: CollabNetwork, authors_p: Iterable[str], authors_q: Iterable[str]) -> float | int:
    """Shortest co-authorship distance between any author of p and any author of q.

    A shared author gives 0 whether or not it appears in ``net``; authors
    missing from the network never contribute a finite path.
    """
    authors_p, authors_q = set(authors_p), set(authors_q)
    if authors_p & authors_q:
        return 0
    idx = net.node_index
    targets = {idx[a] for a in authors_q if a in idx}
    sources = [idx[a] for a in authors_p if a in idx]
    if not targets or not sources:
        return INFINITE
    dist = {s: 0 for s in sources}
    queue = deque(sources)
    while queue:
        u = queue.popleft()
        du = dist[u] + 1
        for v in net.neighbors(u):
            v = int(v)
            if v in dist:
                continue
            if v in targets:
                return du
            dist[v] = du
            queue.append(v)
    return INFINITE


@dataclass
class DistanceTable:
    """Columnar citation-distance records; ``distance`` uses ``INF_CODE`` for infinity."""

    cited: list[str]
    citing: list[str]
    year: np.ndarray
    distance: np.ndarray
    capped: np.ndarray

    def __len__(self) -> int:
        return len(self.cited)

    @classmethod
    def empty(cls) -> "DistanceTable":
        return cls([], [], np.zeros(0, np.int64), np.zeros(0, np.int64), np.zeros(0, bool))

    @classmethod
    def concat(cls, tables: Sequence["DistanceTable"]) -> "DistanceTable":
        tables = [t for t in tables if len(t)]
        if not tables:
            return cls.empty()
        return cls(
            [c for t in tables for c in t.cited],
            [c for t in tables for c in t.citing],
            np.concatenate([t.year for t in tables]),
            np.concatenate([t.distance for t in tables]),
            np.concatenate([t.capped for t in tables]),
        )

    @classmethod
    def from_records(cls, records: Sequence[CitationDistanceRecord]) -> "DistanceTable":
        return cls(
            [r.cited_paper_id for r in records],
            [r.citing_paper_id for r in records],
            np.array([r.citing_year for r in records], dtype=np.int64),
            np.array([INF_CODE if r.distance == INFINITE else int(r.distance) for r in records], dtype=np.int64),
            np.array([r.capped for r in records], dtype=bool),
        )

    def is_infinite(self) -> np.ndarray:
        return self.distance == INF_CODE

    def distance_values(self) -> np.ndarray:
        """Distances as floats with ``inf`` for infinite entries."""
        out = self.distance.astype(np.float64)
        out[self.is_infinite()] = np.inf
        return out

    def record(self, i: int) -> CitationDistanceRecord:
        d = int(self.distance[i])
        return CitationDistanceRecord(
            self.cited[i], self.citing[i], int(self.year[i]),
            INFINITE if d == INF_CODE else d, bool(self.capped[i]),
        )

    def records(self) -> list[CitationDistanceRecord]:
        return [self.record(i) for i in range(len(self))]

    def select(self, mask: np.ndarray) -> "DistanceTable":
        idx = np.flatnonzero(mask)
        return DistanceTable(
            [self.cited[i] for i in idx], [self.citing[i] for i in idx],
            self.year[idx], self.distance[idx], self.capped[idx],
        )

    def write_tsv(self, fh) -> None:
        fh.write("citing_year\tcited_paper_id\tciting_paper_id\tdistance\n")
        for i in range(len(self)):
            d = int(self.distance[i])
            dist = format_distance(INFINITE if d == INF_CODE else d, bool(self.capped[i]))
            fh.write(f"{int(self.year[i])}\t{self.cited[i]}\t{self.citing[i]}\t{dist}\n")

    @classmethod
    def read_tsv(cls, fh) -> "DistanceTable":
        header = fh.readline().rstrip("\n").split("\t")
        if header != ["citing_year", "cited_paper_id", "citing_paper_id", "distance"]:
            raise ValueError(f"unexpected distance table header: {header}")
        rows = [line.rstrip("\n").split("\t") for line in fh]
        if any(len(r) != 4 for r in rows):
            raise ValueError("distance table rows must have four fields")
        if not rows:
            return cls.empty()
        y, p, q, d = zip(*rows)
        # few distinct distance strings: parse each once
        labels, inverse = np.unique(np.array(d), return_inverse=True)
        parsed = [parse_distance(t) for t in labels]
        dist = np.array([INF_CODE if v == INFINITE else v for v, _ in parsed], np.int64)
        cap = np.array([c for _, c in parsed], bool)
        return cls(list(p), list(q), np.array(y).astype(np.int64), dist[inverse], cap[inverse])


def thread_count(workers: int) -> int:
    """Threads to start for ``workers``: never more than the usable cores, since extra threads only add overhead."""
    cores = len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)
    return max(1, min(workers, cores))


def _resolve_batch(net: CollabNetwork, seeds, q_src, q_node, max_depth):
    return _msbfs.levels(net.indptr, net.indices, seeds, q_src, q_node, max_depth=max_depth)


def distance_table_for_year(
    corpus: CorpusIndex,
    net: CollabNetwork,
    t: int,
    workers: int = 1,
    depth_cap: int | None = None,
    batch_size: int | None = None,
) -> DistanceTable:
    """Distances for every citation whose citing paper appeared in year ``t``.

    Papers are traversed in batches with the bit-parallel multi-source BFS,
    one traversal per paper seeded from its whole author set.  Output order
    is (cited_paper_id, citing_paper_id) whatever ``workers`` is.
    """
    if net.year != t:
        raise ValueError(f"network is for year {net.year}, not {t}")
    pairs = corpus.citations_by_year.get(t, ())
    n_pairs = len(pairs)
    distance = np.full(n_pairs, INF_CODE, dtype=np.int64)
    capped = np.zeros(n_pairs, dtype=bool)
    idx = net.node_index
    comp = net.component_labels
    papers = corpus.papers

    node_cache: dict[str, list[int]] = {}
    comp_cache: dict[str, set[int]] = {}

    def nodes_of(pid):
        nodes = node_cache.get(pid)
        if nodes is None:
            nodes = node_cache[pid] = [idx[a] for a in papers[pid].author_ids if a in idx]
        return nodes

    def comps_of(pid):
        comps = comp_cache.get(pid)
        if comps is None:
            comps = comp_cache[pid] = {int(comp[i]) for i in nodes_of(pid)}
        return comps

    # The graph is undirected, so traversals may start from either end of a
    # citation; seed from the side with fewer distinct papers (usually the
    # citing side, which holds only papers published in year t).
    from_citing = len({q for _, q in pairs}) < len({p for p, _ in pairs})

    # per source paper: list of (pair position, reachable target nodes)
    pending: dict[str, list[tuple[int, list[int]]]] = {}
    for k, (p, q) in enumerate(pairs):
        ap, aq = papers[p].author_ids, papers[q].author_ids
        if not set(ap).isdisjoint(aq):
            distance[k] = 0
            continue
        src, dst = (q, p) if from_citing else (p, q)
        s_nodes, d_nodes = nodes_of(src), nodes_of(dst)
        if not s_nodes or not d_nodes:
            continue
        s_comps = comps_of(src)
        reachable = [j for j in d_nodes if int(comp[j]) in s_comps]
        if reachable:
            pending.setdefault(src, []).append((k, reachable))

    sources = sorted(pending)
    cap = batch_size or _msbfs.batch_capacity(net.n_nodes)
    batches = []
    for start in range(0, len(sources), cap):
        chunk = sources[start:start + cap]
        seeds = [np.array(nodes_of(p), dtype=np.int64) for p in chunk]
        q_pos, q_src, q_node = [], [], []
        for col, p in enumerate(chunk):
            for k, reachable in pending[p]:
                for j in reachable:
                    q_pos.append(k)
                    q_src.append(col)
                    q_node.append(j)
        batches.append((seeds, np.array(q_src, np.int64), np.array(q_node, np.int64), np.array(q_pos, np.int64)))

    def run(batch):
        seeds, q_src, q_node, _ = batch
        return _resolve_batch(net, seeds, q_src, q_node, depth_cap)

    threads = thread_count(workers)
    if threads > 1 and len(batches) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, batches))
    else:
        results = [run(b) for b in batches]

    for (_, _, _, q_pos), lev in zip(batches, results):
        resolved = lev >= 0
        big = np.iinfo(np.int64).max
        best = np.full(n_pairs, big, dtype=np.int64)
        np.minimum.at(best, q_pos[resolved], lev[resolved])
        touched = np.unique(q_pos)
        found = touched[best[touched] != big]
        distance[found] = best[found]
        if depth_cap is not None:
            missing = touched[best[touched] == big]
            distance[missing] = depth_cap
            capped[missing] = True
    if capped.any():
        log.warning("year %d: %d citation distances exceed depth cap %d", t, int(capped.sum()), depth_cap)

    return DistanceTable(
        [p for p, _ in pairs], [q for _, q in pairs],
        np.full(n_pairs, t, dtype=np.int64), distance, capped,
    )


def distances_for_year(corpus: CorpusIndex, net: CollabNetwork, t: int, **kwargs) -> list[CitationDistanceRecord]:
    return distance_table_for_year(corpus, net, t, **kwargs).records()


@dataclass(frozen=True)
class YearContext:
    year: int
    d_bar: float
    valid_pair_count: int
    # year whose average was used; differs from ``year`` after a fallback
    source_year: int | None = None

    def __post_init__(self):
        if not self.d_bar > 0:
            raise ValueError(f"d_bar must be positive, got {self.d_bar}")
        if self.source_year is None:
            object.__setattr__(self, "source_year", self.year)

    @property
    def lambda_(self) -> float:
        return 1.0 / self.d_bar

    @property
    def is_fallback(self) -> bool:
        return self.source_year != self.year


def lcc_valid_mask(table: DistanceTable, lcc: frozenset[str] | set[str], corpus: CorpusIndex) -> np.ndarray:
    """Pairs where at least one author of each paper lies in ``lcc``."""
    papers = corpus.papers
    memo: dict[str, bool] = {}

    def touches(pid):
        hit = memo.get(pid)
        if hit is None:
            hit = memo[pid] = any(a in lcc for a in papers[pid].author_ids)
        return hit

    return np.array([touches(p) and touches(q) for p, q in zip(table.cited, table.citing)], dtype=bool)


def average_citation_distance(
    records: Sequence[CitationDistanceRecord] | DistanceTable,
    lcc: frozenset[str] | set[str] | None,
    corpus: CorpusIndex,
    net: CollabNetwork,
) -> YearContext:
    """Mean distance over citation pairs with an author of each paper in the largest component."""
    table = records if isinstance(records, DistanceTable) else DistanceTable.from_records(records)
    if lcc is None:
        lcc = largest_connected_component(net)
    years = set(table.year.tolist())
    if len(years) > 1:
        raise ValueError(f"records span several citing years: {sorted(years)}")
    year = years.pop() if years else net.year
    valid = lcc_valid_mask(table, lcc, corpus)
    if not valid.any():
        raise DistanceUndefined(f"d_bar undefined for year {year}: no valid citation pairs")
    if table.capped[valid].any():
        raise DistanceUndefined(f"d_bar undefined for year {year}: distances truncated by depth cap")
    d = table.distance[valid]
    if (d == INF_CODE).any():
        raise RuntimeError(f"year {year}: infinite distance between largest-component authors")
    mean = float(d.sum()) / len(d)
    if mean <= 0:
        raise DistanceUndefined(f"d_bar undefined for year {year}: every valid pair has distance 0")
    return YearContext(year, mean, int(valid.sum()))


def fill_year_contexts(contexts: Mapping[int, YearContext | None], years: Iterable[int]) -> dict[int, YearContext]:
    """Give every requested year a context, reusing the nearest earlier computed year.

    When no earlier year has one the nearest later year is used.  Each
    substitution is logged.
    """
    known = sorted(y for y, c in contexts.items() if c is not None)
    if not known:
        raise DistanceUndefined("no year has a defined average citation distance")
    out = {}
    for y in sorted(set(years)):
        ctx = contexts.get(y)
        if ctx is not None:
            out[y] = ctx
            continue
        earlier = [k for k in known if k < y]
        src = earlier[-1] if earlier else min(k for k in known if k > y)
        log.warning("year %d: average citation distance taken from %d", y, src)
        out[y] = YearContext(y, contexts[src].d_bar, 0, source_year=src)
    return out


def write_year_contexts(contexts: Mapping[int, YearContext], fh) -> None:
    fh.write("year\td_bar\tvalid_pair_count\tsource_year\n")
    for y in sorted(contexts):
        c = contexts[y]
        fh.write(f"{y}\t{c.d_bar!r}\t{c.valid_pair_count}\t{c.source_year}\n")


def read_year_contexts(fh) -> dict[int, YearContext]:
    header = fh.readline().rstrip("\n").split("\t")
    if header[:3] != ["year", "d_bar", "valid_pair_count"]:
        raise ValueError(f"unexpected year-context header: {header}")
    out = {}
    for line in fh:
        parts = line.rstrip("\n").split("\t")
        y = int(parts[0])
        src = int(parts[3]) if len(parts) > 3 else y
        out[y] = YearContext(y, float(parts[1]), int(parts[2]), source_year=src)
    return out


def finite_distance_summary(table: DistanceTable) -> dict[int, dict[str, float]]:
    """Per-year box-plot statistics of finite distances (quartiles, 1.5 IQR whiskers)."""
    out = {}
    finite = ~table.is_infinite() & ~table.capped
    for y in np.unique(table.year):
        d = table.distance[(table.year == y) & finite].astype(np.float64)
        if d.size == 0:
            continue
        q1, med, q3 = np.percentile(d, [25, 50, 75])
        iqr = q3 - q1
        lo = d[d >= q1 - 1.5 * iqr].min()
        hi = d[d <= q3 + 1.5 * iqr].max()
        out[int(y)] = {
            "count": int(d.size), "mean": float(d.mean()), "q1": float(q1), "median": float(med),
            "q3": float(q3), "whisker_low": float(lo), "whisker_high": float(hi),
        }
    return out
