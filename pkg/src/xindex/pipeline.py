"""Workspace-backed pipeline stages.

Every stage reads flat files written by earlier stages from the workspace
directory, writes its own tables (tab-separated, with headers), and records
a manifest with the configuration, input digests and engine version.
Outputs carry no timestamps, so rerunning a stage on unchanged inputs
reproduces them byte for byte.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
import os
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from .analysis.clustering import best_k, cluster_profile, enrichment_ratio, silhouette_sweep, standardize
from .analysis.cohorts import read_author_file, read_tier_file, trajectory_cohort
from .analysis.nonparametric import TestResult, mann_whitney_u, wilcoxon_signed_rank
from .analysis.ranking import rank_scholars, ranking_delta
from .analysis.trajectory import FEATURE_NAMES, feature_matrix, metric_series
from .collabnet import (
    DEFAULT_WINDOW,
    EXACT_PATH_THRESHOLD,
    build_window_graph,
    format_stat,
    graph_stats,
    largest_connected_component,
    write_edge_list,
)
from .corpus import CorpusIndex, build_index, load_serialized, read_records, serialize_records
from .synth import SynthConfig, generate_corpus, hp_author_ids, ta_author_ids
from .distance import (
    DistanceTable,
    DistanceUndefined,
    average_citation_distance,
    distance_table_for_year,
    fill_year_contexts,
    finite_distance_summary,
    read_year_contexts,
    thread_count,
    write_year_contexts,
)
from .metrics import METRIC_NAMES, AuthorshipIndex, CitationArrays, metrics_table, write_metrics

log = logging.getLogger(__name__)

WORKSPACE_ENV = "XINDEX_WORKSPACE"
DEFAULT_WORKSPACE = "xindex-workspace"

INDEX_FILE = "index.jsonl"
INGEST_REPORT = "ingest_report.json"
DISTANCES_FILE = "distances.tsv"
CONTEXT_FILE = "year_context.tsv"


class MissingArtifact(Exception):
    """A stage's prerequisite output is absent from the workspace."""

    def __init__(self, path: Path, stage: str):
        super().__init__(f"missing {path.name} in {path.parent}: run the '{stage}' stage first")
        self.stage = stage


def default_workspace() -> Path:
    return Path(os.environ.get(WORKSPACE_ENV, DEFAULT_WORKSPACE))


def named_seed(seed: int, name: str) -> int:
    """Independent, reproducible child seed for one named consumer of randomness."""
    ss = np.random.SeedSequence([seed, zlib.crc32(name.encode())])
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> 1)


def sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class Workspace:
    root: Path
    _index: tuple | None = field(default=None, init=False, repr=False, compare=False)

    def path(self, *parts: str) -> Path:
        return self.root.joinpath(*parts)

    def require(self, name: str, stage: str) -> Path:
        p = self.path(name)
        if not p.exists():
            raise MissingArtifact(p, stage)
        return p

    def open_write(self, *parts: str):
        p = self.path(*parts)
        p.parent.mkdir(parents=True, exist_ok=True)
        return open(p, "w", encoding="utf-8", newline="\n")

    def manifest(self, stage: str, config: dict, inputs: Iterable[Path], outputs: Iterable[Path]) -> Path:
        def rel(p: Path) -> str:
            p = Path(p)
            try:
                return p.resolve().relative_to(self.root.resolve()).as_posix()
            except ValueError:
                return str(p)

        doc = {
            "stage": stage,
            "engine_version": __version__,
            "config": config,
            "inputs": {rel(p): sha256(p) for p in sorted(set(inputs), key=str)},
            "outputs": {rel(p): sha256(p) for p in sorted(set(outputs), key=str)},
        }
        with self.open_write("manifests", f"{stage}.json") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return self.path("manifests", f"{stage}.json")

    # shared loaders

    def load_index(self) -> CorpusIndex:
        p = self.require(INDEX_FILE, "ingest")
        st = p.stat()
        key = (st.st_mtime_ns, st.st_size)
        if self._index is None or self._index[0] != key:
            self._index = (key, build_index(load_serialized(p)))
        return self._index[1]

    def load_distances(self) -> tuple[DistanceTable, dict]:
        dpath = self.require(DISTANCES_FILE, "distances")
        cpath = self.require(CONTEXT_FILE, "distances")
        with open(dpath, encoding="utf-8") as fh:
            table = DistanceTable.read_tsv(fh)
        with open(cpath, encoding="utf-8") as fh:
            contexts = read_year_contexts(fh)
        return table, contexts


def _f(v: float) -> str:
    return f"{v:.6f}"


# -- stages -----------------------------------------------------------------

def run_ingest(ws: Workspace, input_path: Path) -> dict:
    records, report = read_records(input_path)
    index = build_index(records)
    out = ws.path(INDEX_FILE)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(serialize_records(records))
    summary = report.to_dict()
    summary["dangling_references"] = index.dangling_references
    summary["citations"] = index.citation_count()
    summary["papers"] = len(index.papers)
    summary["authors"] = len(index.author_papers)
    with ws.open_write(INGEST_REPORT) as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    ws.manifest("ingest", {"input": str(input_path)}, [Path(input_path)], [out, ws.path(INGEST_REPORT)])
    return summary


STATS_HEADER = ("year", "window", "n_nodes", "n_edges", "lcc_size", "lcc_edges", "avg_degree",
                "avg_shortest_path", "sample_pairs")


def run_graph(ws: Workspace, years: Sequence[int] | None, window: int = DEFAULT_WINDOW, sample_pairs: int = 1000,
              exact_threshold: int = EXACT_PATH_THRESHOLD, seed: int = 0, workers: int = 1) -> list[Path]:
    index = ws.load_index()
    years = sorted(years) if years else index.years

    def one(y):
        net = build_window_graph(index, y, window)
        st = graph_stats(net, sample_pairs, named_seed(seed, f"graph/{y}"), exact_threshold)
        with ws.open_write("graph", f"edges_{y}.tsv") as fh:
            write_edge_list(net, fh)
        with ws.open_write("graph", f"stats_{y}.tsv") as fh:
            fh.write("\t".join(STATS_HEADER) + "\n")
            fh.write("\t".join([
                str(y), str(window), str(st.n_nodes), str(st.n_edges), str(st.lcc_size), str(st.lcc_edges),
                _f(st.avg_degree), format_stat(st.avg_shortest_path), str(st.sample_pairs),
            ]) + "\n")
        return [ws.path("graph", f"edges_{y}.tsv"), ws.path("graph", f"stats_{y}.tsv")]

    threads = thread_count(workers)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outputs = [p for ps in pool.map(one, years) for p in ps]
    else:
        outputs = [p for y in years for p in one(y)]
    cfg = {"years": list(years), "window": window, "sample_pairs": sample_pairs,
           "exact_threshold": exact_threshold, "seed": seed}
    ws.manifest("graph", cfg, [ws.path(INDEX_FILE)], outputs)
    return outputs


def compute_distances(index: CorpusIndex, years: Sequence[int], window: int = DEFAULT_WINDOW, workers: int = 1,
                      depth_cap: int | None = None) -> tuple[DistanceTable, dict]:
    tables = []
    raw = {}
    for y in years:
        net = build_window_graph(index, y, window)
        table = distance_table_for_year(index, net, y, workers=workers, depth_cap=depth_cap)
        tables.append(table)
        try:
            raw[y] = average_citation_distance(table, largest_connected_component(net), index, net)
        except DistanceUndefined as exc:
            log.warning("%s", exc)
            raw[y] = None
    contexts = fill_year_contexts(raw, years) if years else {}
    return DistanceTable.concat(tables), contexts


def run_distances(ws: Workspace, years: Sequence[int] | None = None, window: int = DEFAULT_WINDOW, workers: int = 1,
                  depth_cap: int | None = None) -> list[Path]:
    index = ws.load_index()
    years = sorted(years) if years else index.citation_years
    table, contexts = compute_distances(index, years, window, workers, depth_cap)
    with ws.open_write(DISTANCES_FILE) as fh:
        table.write_tsv(fh)
    with ws.open_write(CONTEXT_FILE) as fh:
        write_year_contexts(contexts, fh)
    with ws.open_write("distance_summary.tsv") as fh:
        cols = ("count", "mean", "q1", "median", "q3", "whisker_low", "whisker_high")
        fh.write("year\t" + "\t".join(cols) + "\n")
        for y, row in sorted(finite_distance_summary(table).items()):
            fh.write(f"{y}\t" + "\t".join(str(row[c]) if c == "count" else _f(row[c]) for c in cols) + "\n")
    outputs = [ws.path(DISTANCES_FILE), ws.path(CONTEXT_FILE), ws.path("distance_summary.tsv")]
    cfg = {"years": list(years), "window": window, "depth_cap": depth_cap}
    ws.manifest("distances", cfg, [ws.path(INDEX_FILE)], outputs)
    return outputs


def run_metrics(ws: Workspace, as_of: int) -> Path:
    index = ws.load_index()
    table, contexts = ws.load_distances()
    rows = metrics_table(index, table, contexts, as_of)
    name = f"metrics_{as_of}.tsv"
    with ws.open_write(name) as fh:
        write_metrics(rows, fh)
    inputs = [ws.path(INDEX_FILE), ws.path(DISTANCES_FILE), ws.path(CONTEXT_FILE)]
    ws.manifest("metrics", {"as_of": as_of}, inputs, [ws.path(name)])
    return ws.path(name)


TEST_HEADER = ("test", "statistic", "p_value", "n", "alternative", "method")


def _write_test(fh, label: str, res: TestResult) -> None:
    fh.write(f"{label}\t{res.statistic!r}\t{res.p_value!r}\t{res.n}\t{res.alternative}\t{res.method}\n")


class _RankCache:
    def __init__(self, index, table, contexts):
        self.index, self.table, self.contexts = index, table, contexts
        self.auth = AuthorshipIndex(index)
        self.cites = CitationArrays.build(table, contexts, self.auth)
        self._tables = {}

    def ranks(self, year: int, metric: str):
        if year not in self._tables:
            self._tables[year] = metrics_table(self.index, self.table, self.contexts, year, auth=self.auth,
                                               cites=self.cites)
        rows = self._tables[year]
        return rank_scholars({m.author_id: m.value(metric) for m in rows}, metric)


def rank_deltas(index: CorpusIndex, table: DistanceTable, contexts: dict, members: Sequence[tuple[str, int]],
                metric: str, baseline: str) -> list[tuple[str, int, float, float, float]]:
    """(author, as-of year, rank under metric, rank under baseline, delta) per cohort member."""
    cache = _RankCache(index, table, contexts)
    out = []
    for author, year in members:
        rx = cache.ranks(year, metric)
        rb = cache.ranks(year, baseline)
        d = ranking_delta(rx, rb, [author])[author]
        out.append((author, year, rx[author], rb[author], d))
    return out


def run_rank_compare(ws: Workspace, metric: str, baseline: str, alternative: str, as_of: int | None,
                     cohort: Path | None = None, tiers: Path | None = None, group1: str = "T1",
                     group2: str = "T3") -> tuple[Path, list[tuple[str, TestResult]]]:
    if metric not in METRIC_NAMES or baseline not in METRIC_NAMES:
        raise ValueError(f"metrics must be among {METRIC_NAMES}")
    if cohort is None and tiers is None:
        raise ValueError("rank-compare needs --cohort and/or --tiers")
    index = ws.load_index()
    table, contexts = ws.load_distances()
    last = max(contexts) if contexts else index.years[-1]

    members: list[tuple[str, int, str]] = []
    tier_of: dict[str, str] = {}
    if cohort is not None:
        for author, year in read_author_file(cohort):
            y = as_of if as_of is not None else (year if year is not None else last)
            members.append((author, y, "cohort"))
    if tiers is not None:
        tier_of = read_tier_file(tiers)
        y = as_of if as_of is not None else last
        members.extend((a, y, t) for a, t in sorted(tier_of.items()) if t in (group1, group2))

    unknown = sorted({a for a, _, _ in members if a not in index.author_papers})
    if unknown:
        raise KeyError(f"cohort authors not in corpus: {', '.join(unknown[:5])}")
    rows = rank_deltas(index, table, contexts, [(a, y) for a, y, _ in members], metric, baseline)

    label = "_".join(Path(f).stem for f in (cohort, tiers) if f is not None)
    stem = f"{label}_{metric}_vs_{baseline}"
    with ws.open_write("rank_compare", f"{stem}_deltas.tsv") as fh:
        fh.write("author_id\tas_of_year\tgroup\trank_metric\trank_baseline\tdelta\n")
        for (a, y, rx, rb, d), (_, _, group) in zip(rows, members):
            fh.write(f"{a}\t{y}\t{group}\t{rx!r}\t{rb!r}\t{d!r}\n")

    def deltas(group):
        return [r[4] for r, m in zip(rows, members) if m[2] == group]

    results = []
    if cohort is not None:
        results.append(("wilcoxon_signed_rank", wilcoxon_signed_rank(deltas("cohort"), alternative)))
    if tiers is not None:
        res = mann_whitney_u(deltas(group1), deltas(group2), alternative)
        results.append((f"mann_whitney_u:{group1}_vs_{group2}", res))

    test_path = ws.path("rank_compare", f"{stem}_tests.tsv")
    with ws.open_write("rank_compare", f"{stem}_tests.tsv") as fh:
        fh.write("\t".join(TEST_HEADER) + "\n")
        for label, res in results:
            _write_test(fh, label, res)
    inputs = [ws.path(INDEX_FILE), ws.path(DISTANCES_FILE), ws.path(CONTEXT_FILE)]
    inputs += [Path(p) for p in (cohort, tiers) if p is not None]
    cfg = {"metric": metric, "baseline": baseline, "alternative": alternative, "as_of": as_of,
           "cohort": str(cohort) if cohort else None, "tiers": str(tiers) if tiers else None,
           "group1": group1, "group2": group2}
    ws.manifest(f"rank-compare_{stem}", cfg, inputs, [ws.path("rank_compare", f"{stem}_deltas.tsv"), test_path])
    return test_path, results


def run_trajectory(ws: Workspace, metric: str = "x", min_citations: int = 10) -> tuple[Path, Path]:
    index = ws.load_index()
    table, contexts = ws.load_distances()
    auth = AuthorshipIndex(index)
    authors, first, series = metric_series(index, table, contexts, metric, auth=auth)
    tc = series if metric == "tc" else metric_series(index, table, contexts, "tc", auth=auth)[2]
    keep = trajectory_cohort(first, tc, index.years[-1], min_citations)
    sel = np.flatnonzero(keep)
    feats = feature_matrix(series[sel]) if len(sel) else np.zeros((0, len(FEATURE_NAMES)))

    s_path = ws.path("trajectory", f"{metric}_series.tsv")
    f_path = ws.path("trajectory", f"{metric}_features.tsv")
    with ws.open_write("trajectory", f"{metric}_series.tsv") as fh:
        fh.write("author_id\tfirst_year\t" + "\t".join(f"year{k}" for k in range(1, 11)) + "\n")
        for i in sel:
            fh.write(f"{authors[i]}\t{first[i]}\t" + "\t".join(_f(v) for v in series[i]) + "\n")
    with ws.open_write("trajectory", f"{metric}_features.tsv") as fh:
        fh.write("author_id\t" + "\t".join(FEATURE_NAMES) + "\n")
        for row, i in zip(feats, sel):
            vals = [_f(v) for v in row[:9]] + [str(int(row[9])), str(int(row[10]))]
            fh.write(f"{authors[i]}\t" + "\t".join(vals) + "\n")
    inputs = [ws.path(INDEX_FILE), ws.path(DISTANCES_FILE), ws.path(CONTEXT_FILE)]
    ws.manifest("trajectory", {"metric": metric, "min_citations": min_citations}, inputs, [s_path, f_path])
    return s_path, f_path


def read_feature_table(path: Path) -> tuple[list[str], np.ndarray]:
    authors, rows = [], []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        if tuple(header[1:]) != FEATURE_NAMES:
            raise ValueError(f"unexpected feature header in {path}")
        for line in fh:
            parts = line.rstrip("\n").split("\t")
            authors.append(parts[0])
            rows.append([float(v) for v in parts[1:]])
    return authors, np.array(rows, dtype=np.float64).reshape(-1, len(FEATURE_NAMES))


def run_cluster(ws: Workspace, metric: str = "x", k_min: int = 2, k_max: int = 10, k: int | None = None,
                seed: int = 0, flags: Path | None = None) -> list[Path]:
    fpath = ws.require(os.path.join("trajectory", f"{metric}_features.tsv"), "trajectory")
    authors, X = read_feature_table(fpath)
    if len(authors) < 2:
        raise ValueError("not enough scholars in the trajectory cohort to cluster")
    Z = standardize(X)
    ks = [kk for kk in range(k_min, k_max + 1) if kk <= len(authors)]
    sweep = silhouette_sweep(Z, ks, seed=named_seed(seed, f"cluster/{metric}"))
    chosen = k if k is not None else best_k(sweep)
    if chosen not in sweep:
        sweep.update(silhouette_sweep(Z, [chosen], seed=named_seed(seed, f"cluster/{metric}")))
    labels = sweep[chosen][1].labels
    d = "cluster"
    outputs = [ws.path(d, f"{metric}_silhouette.tsv"), ws.path(d, f"{metric}_assignments.tsv"),
               ws.path(d, f"{metric}_profile.tsv")]
    with ws.open_write(d, f"{metric}_silhouette.tsv") as fh:
        fh.write("k\tsilhouette\tinertia\n")
        for kk in sorted(sweep):
            fh.write(f"{kk}\t{_f(sweep[kk][0])}\t{_f(sweep[kk][1].inertia)}\n")
    with ws.open_write(d, f"{metric}_assignments.tsv") as fh:
        fh.write("author_id\tcluster\n")
        for a, lab in zip(authors, labels):
            fh.write(f"{a}\t{int(lab)}\n")
    prof = cluster_profile(X, labels)
    with ws.open_write(d, f"{metric}_profile.tsv") as fh:
        fh.write("feature\t" + "\t".join(f"cluster{j}" for j in sorted(prof)) + "\n")
        for fi, name in enumerate(FEATURE_NAMES):
            fh.write(name + "\t" + "\t".join(_f(prof[j][fi]) for j in sorted(prof)) + "\n")
    inputs = [fpath]
    if flags is not None:
        flagged = {a for a, _ in read_author_file(flags)}
        inputs.append(Path(flags))
        if chosen == 2:
            e = enrichment_ratio(dict(zip(authors, (int(v) for v in labels))), flagged)
            with ws.open_write(d, f"{metric}_enrichment.tsv") as fh:
                fh.write("cluster1_count\tflagged_in_cluster1\tratio1\tcluster0_count\tflagged_in_cluster0\tratio0"
                         "\tenrichment\n")
                fh.write(f"{e.count1}\t{e.flagged1}\t{_f(e.ratio1)}\t{e.count0}\t{e.flagged0}\t{_f(e.ratio0)}"
                         f"\t{_f(e.enrichment) if np.isfinite(e.enrichment) else str(e.enrichment)}\n")
            outputs.append(ws.path(d, f"{metric}_enrichment.tsv"))
        else:
            log.warning("enrichment needs a two-cluster solution; chosen k=%d", chosen)
    cfg = {"metric": metric, "k_min": k_min, "k_max": k_max, "k": k, "seed": seed,
           "flags": str(flags) if flags else None}
    ws.manifest("cluster", cfg, inputs, outputs)
    return outputs


def run_synth(ws: Workspace, config: SynthConfig) -> list[Path]:
    """Write a synthetic corpus plus the planted archetype cohorts (one author per line)."""
    records = generate_corpus(config)
    out = ws.path("synth", "corpus.jsonl")
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(serialize_records(records))
    paths = [out]
    for name, ids in (("hp.txt", hp_author_ids(config)), ("ta.txt", ta_author_ids(config))):
        with ws.open_write("synth", name) as fh:
            fh.writelines(f"{a}\n" for a in ids)
        paths.append(ws.path("synth", name))
    cfg = dataclasses.asdict(config)
    ws.manifest("synth", cfg, [], paths)
    return paths
