"""Per-scholar citation metrics: np, tc, h-index, c-index and the distance-weighted x-index."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .corpus import CorpusIndex
from .distance import INF_CODE, INFINITE, CitationDistanceRecord, DistanceTable, YearContext

METRIC_NAMES = ("np", "tc", "h", "c", "x")


class MissingYearContext(KeyError):
    def __init__(self, year: int):
        super().__init__(f"no average citation distance for year {year}")
        self.year = year

    def __str__(self):
        return self.args[0]


def weight(d, d_bar: float) -> float:
    """``1 - exp(-d / d_bar)``: 0 for a shared author, exactly 1 for an infinite distance."""
    if not d_bar > 0:
        raise ValueError(f"d_bar must be positive, got {d_bar}")
    if d == INFINITE:
        return 1.0
    if d < 0:
        raise ValueError(f"distance must be non-negative, got {d}")
    # numpy's expm1 rather than math's: keeps this bit-identical to weights()
    return float(-np.expm1(-d / d_bar))


def weights(distance: np.ndarray, d_bar: np.ndarray | float) -> np.ndarray:
    """Vectorised :func:`weight`; ``distance`` may contain ``inf``."""
    distance = np.asarray(distance, dtype=np.float64)
    d_bar = np.asarray(d_bar, dtype=np.float64)
    if np.any(d_bar <= 0):
        raise ValueError("d_bar must be positive")
    with np.errstate(invalid="ignore"):
        out = -np.expm1(-distance / d_bar)
    return np.where(np.isinf(distance), 1.0, out)


def _context(contexts: Mapping[int, YearContext], year: int) -> YearContext:
    try:
        return contexts[year]
    except KeyError:
        raise MissingYearContext(year) from None


def x_index(records: Sequence[CitationDistanceRecord], contexts: Mapping[int, YearContext]) -> float:
    """Sum of per-citation weights, each normalised by its citing year's average distance.

    Records are summed in (cited, citing) order so the float result does not
    depend on input order.
    """
    total = 0.0
    for r in sorted(records, key=lambda r: (r.cited_paper_id, r.citing_paper_id)):
        total += weight(r.distance, _context(contexts, r.citing_year).d_bar)
    return total


def h_index(per_paper_citation_counts: Sequence[int]) -> int:
    counts = sorted(per_paper_citation_counts, reverse=True)
    h = 0
    for rank, c in enumerate(counts, start=1):
        if c < rank:
            break
        h = rank
    return h


def c_index(distances: Sequence) -> int:
    """Largest c with at least c citations at distance >= c (infinite distances always qualify)."""
    ds = sorted(distances, reverse=True)
    c = 0
    for rank, d in enumerate(ds, start=1):
        if d < rank:
            break
        c = rank
    return c


@dataclass(frozen=True)
class ScholarMetrics:
    author_id: str
    as_of_year: int
    np: int
    tc: int
    h: int
    c: int
    x: float
    n_inf: int

    def value(self, metric: str) -> float:
        if metric not in METRIC_NAMES:
            raise ValueError(f"unknown metric {metric!r}")
        return getattr(self, metric)


def _as_table(distances) -> DistanceTable:
    if isinstance(distances, DistanceTable):
        return distances
    if isinstance(distances, Mapping):
        parts = [d if isinstance(d, DistanceTable) else DistanceTable.from_records(d) for _, d in sorted(distances.items())]
        return DistanceTable.concat(parts)
    return DistanceTable.from_records(list(distances))


def metrics_as_of(
    corpus: CorpusIndex,
    distance_tables,
    contexts: Mapping[int, YearContext],
    author_id: str,
    cutoff: int,
) -> ScholarMetrics:
    """Metrics of one scholar counting only papers and citations dated up to ``cutoff``.

    ``distance_tables`` is a :class:`DistanceTable`, a sequence of records,
    or a mapping year -> either.
    """
    if author_id not in corpus.author_papers:
        raise KeyError(f"unknown author {author_id!r}")
    table = _as_table(distance_tables)
    own = [p for p in corpus.author_papers[author_id] if corpus.papers[p].year <= cutoff]
    own_set = set(own)
    counts = dict.fromkeys(own, 0)
    recs = []
    for i in range(len(table)):
        if table.cited[i] in own_set and table.year[i] <= cutoff:
            counts[table.cited[i]] += 1
            recs.append(table.record(i))
    dists = [r.distance for r in recs]
    return ScholarMetrics(
        author_id=author_id,
        as_of_year=cutoff,
        np=len(own),
        tc=len(recs),
        h=h_index(list(counts.values())),
        c=c_index(dists),
        x=x_index(recs, contexts),
        n_inf=sum(1 for d in dists if d == INFINITE),
    )


class AuthorshipIndex:
    """Dense author/paper incidence arrays for population-wide computations."""

    def __init__(self, corpus: CorpusIndex):
        self.corpus = corpus
        self.author_ids = corpus.authors()
        self.author_pos = {a: i for i, a in enumerate(self.author_ids)}
        # papers in sorted id order so integer order equals string order
        self.paper_ids = sorted(corpus.papers)
        self.paper_pos = {p: i for i, p in enumerate(self.paper_ids)}
        self.paper_year = np.array([corpus.papers[p].year for p in self.paper_ids], dtype=np.int64)
        counts = np.array([len(corpus.papers[p].author_ids) for p in self.paper_ids], dtype=np.int64)
        self.pa_ptr = np.zeros(len(self.paper_ids) + 1, dtype=np.int64)
        np.cumsum(counts, out=self.pa_ptr[1:])
        self.pa_author = np.array(
            [self.author_pos[a] for p in self.paper_ids for a in corpus.papers[p].author_ids], dtype=np.int64
        )
        self.pa_paper = np.repeat(np.arange(len(self.paper_ids), dtype=np.int64), counts)
        self.first_year = np.full(len(self.author_ids), np.iinfo(np.int64).max, dtype=np.int64)
        np.minimum.at(self.first_year, self.pa_author, self.paper_year[self.pa_paper])

    def expand(self, paper_idx: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """For each entry of ``paper_idx`` yield one row per author: (author index, source row)."""
        n_auth = self.pa_ptr[paper_idx + 1] - self.pa_ptr[paper_idx]
        rows = np.repeat(np.arange(len(paper_idx), dtype=np.int64), n_auth)
        offs = np.arange(len(rows), dtype=np.int64) - np.repeat(np.cumsum(n_auth) - n_auth, n_auth)
        authors = self.pa_author[self.pa_ptr[paper_idx][rows] + offs]
        return authors, rows

    def papers_per_year(self) -> dict[int, np.ndarray]:
        """Per calendar year, number of papers per author (dense author order)."""
        out = {}
        years = self.paper_year[self.pa_paper]
        for y in np.unique(years):
            out[int(y)] = np.bincount(self.pa_author[years == y], minlength=len(self.author_ids))
        return out


@dataclass
class CitationArrays:
    """Citation table joined to dense paper indices, with per-citation weights.

    Rows are sorted by (cited, citing); the x-index sums rely on that order.
    """

    cited: np.ndarray
    citing: np.ndarray
    year: np.ndarray
    distance: np.ndarray
    weight: np.ndarray

    @classmethod
    def build(cls, table: DistanceTable, contexts: Mapping[int, YearContext], auth: AuthorshipIndex,
              max_year: int | None = None) -> "CitationArrays":
        pos = auth.paper_pos
        cited = np.array([pos[p] for p in table.cited], dtype=np.int64)
        citing = np.array([pos[q] for q in table.citing], dtype=np.int64)
        year = table.year.astype(np.int64)
        keep = np.ones(len(year), dtype=bool) if max_year is None else year <= max_year
        d_bar = np.empty(len(year), dtype=np.float64)
        for y in np.unique(year[keep]):
            d_bar[year == y] = _context(contexts, int(y)).d_bar
        d_bar[~keep] = 1.0
        dist = table.distance_values()
        order = np.lexsort((citing, cited))
        return cls(cited[order], citing[order], year[order], table.distance[order], weights(dist, d_bar)[order])

    def select(self, mask: np.ndarray) -> "CitationArrays":
        return CitationArrays(self.cited[mask], self.citing[mask], self.year[mask], self.distance[mask], self.weight[mask])


def _group_rank(group: np.ndarray) -> np.ndarray:
    """1-based position of each entry within its run of equal ``group`` values (input sorted by group)."""
    n = len(group)
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    starts = np.concatenate(([True], group[1:] != group[:-1]))
    start_pos = np.maximum.accumulate(np.where(starts, np.arange(n), 0))
    return np.arange(n) - start_pos + 1


def metrics_table(
    corpus: CorpusIndex,
    distances,
    contexts: Mapping[int, YearContext],
    cutoff: int,
    auth: AuthorshipIndex | None = None,
    cites: CitationArrays | None = None,
) -> list[ScholarMetrics]:
    """Metrics for every author with at least one paper published by ``cutoff``, sorted by author id."""
    auth = auth or AuthorshipIndex(corpus)
    if cites is None:
        cites = CitationArrays.build(_as_table(distances), contexts, auth, max_year=cutoff)
    n_auth = len(auth.author_ids)

    pa_year = auth.paper_year[auth.pa_paper]
    live = pa_year <= cutoff
    np_counts = np.bincount(auth.pa_author[live], minlength=n_auth)

    keep = (cites.year <= cutoff) & (auth.paper_year[cites.cited] <= cutoff)
    c = cites.select(keep)
    a_idx, rows = auth.expand(c.cited)
    dist = c.distance[rows]
    w = c.weight[rows]

    tc = np.bincount(a_idx, minlength=n_auth)
    n_inf = np.bincount(a_idx[dist == INF_CODE], minlength=n_auth)

    # x: bincount adds weights in array order, and rows are in (cited, citing)
    # order, so each author's sum matches x_index() bit for bit
    xs = np.bincount(a_idx, weights=w, minlength=n_auth) if len(w) else np.zeros(n_auth)

    # c-index: rank citations by distance (descending) within each author
    big = np.iinfo(np.int64).max
    dkey = np.where(dist == INF_CODE, big, dist)
    order = np.lexsort((-dkey, a_idx)) if len(dkey) else np.zeros(0, dtype=np.int64)
    ranks = _group_rank(a_idx[order])
    c_vals = np.bincount(a_idx[order][dkey[order] >= ranks], minlength=n_auth)

    # h-index: per (author, paper) counts incl. uncited papers
    per_paper = np.bincount(c.cited, minlength=len(auth.paper_ids))
    pa_a = auth.pa_author[live]
    pa_cnt = per_paper[auth.pa_paper[live]]
    order = np.lexsort((-pa_cnt, pa_a))
    ranks = _group_rank(pa_a[order])
    h_vals = np.bincount(pa_a[order][pa_cnt[order] >= ranks], minlength=n_auth)

    out = []
    for i in np.flatnonzero(np_counts > 0):
        out.append(ScholarMetrics(
            author_id=auth.author_ids[i], as_of_year=cutoff, np=int(np_counts[i]), tc=int(tc[i]),
            h=int(h_vals[i]), c=int(c_vals[i]), x=float(xs[i]), n_inf=int(n_inf[i]),
        ))
    return out


METRICS_HEADER = ("author_id", "as_of_year", "np", "tc", "h", "c", "x", "n_inf")


def write_metrics(rows: Sequence[ScholarMetrics], fh) -> None:
    fh.write("\t".join(METRICS_HEADER) + "\n")
    for m in rows:
        fh.write(f"{m.author_id}\t{m.as_of_year}\t{m.np}\t{m.tc}\t{m.h}\t{m.c}\t{m.x:.6f}\t{m.n_inf}\n")


def read_metrics(fh) -> list[ScholarMetrics]:
    header = tuple(fh.readline().rstrip("\n").split("\t"))
    if header != METRICS_HEADER:
        raise ValueError(f"unexpected metrics header: {header}")
    out = []
    for line in fh:
        a, y, n, tc, h, c, x, ninf = line.rstrip("\n").split("\t")
        out.append(ScholarMetrics(a, int(y), int(n), int(tc), int(h), int(c), float(x), int(ninf)))
    return out
