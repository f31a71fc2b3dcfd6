import io
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from xindex.collabnet import build_window_graph, largest_connected_component, network_from_edges
from xindex.distance import (
    INFINITE,
    CitationDistanceRecord,
    DistanceTable,
    DistanceUndefined,
    YearContext,
    average_citation_distance,
    distance_table_for_year,
    distances_for_year,
    fill_year_contexts,
    format_distance,
    paper_pair_distance,
    thread_count,
    parse_distance,
    read_year_contexts,
    write_year_contexts,
)

from conftest import floyd_warshall, make_corpus, random_graph

PATH = network_from_edges([("a", "b"), ("b", "c")], year=2010)


def test_pair_distance_examples():
    assert paper_pair_distance(PATH, {"a", "x"}, {"x"}) == 0
    assert paper_pair_distance(PATH, {"a"}, {"c"}) == 2
    split = network_from_edges([("a", "b"), ("c", "d")])
    assert paper_pair_distance(split, {"a"}, {"d"}) == INFINITE
    assert paper_pair_distance(PATH, {"a"}, {"ghost"}) == INFINITE


def oracle(D, pos, authors_p, authors_q):
    if set(authors_p) & set(authors_q):
        return 0
    ps = [pos[a] for a in authors_p if a in pos]
    qs = [pos[a] for a in authors_q if a in pos]
    if not ps or not qs:
        return math.inf
    return D[np.ix_(ps, qs)].min()


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_pair_distance_matches_floyd_warshall(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 60))
    edges = random_graph(rng, n, 2.0 / max(n, 1))
    names = [f"u{i}" for i in range(n)]
    net = network_from_edges([(names[u], names[v]) for u, v in edges], nodes=names)
    D = floyd_warshall(n, edges)
    pos = {a: i for i, a in enumerate(names)}
    pool = names + ["ghost1", "ghost2"]
    for _ in range(10):
        p = list(rng.choice(pool, size=int(rng.integers(1, 4)), replace=False))
        q = list(rng.choice(pool, size=int(rng.integers(1, 4)), replace=False))
        assert paper_pair_distance(net, p, q) == oracle(D, pos, p, q)


def path_corpus():
    return make_corpus(
        ("p0", 2008, "ab", []),
        ("p1", 2009, "bc", []),
        ("p2", 2010, "c", ["p0", "p1"]),
        ("p3", 2010, "a", ["p0"]),
        ("old", 1990, "z", []),
        ("p4", 2010, "c", ["old"]),
    )


def test_distances_for_year_examples():
    idx = path_corpus()
    net = build_window_graph(idx, 2010)
    recs = {(r.cited_paper_id, r.citing_paper_id): r for r in distances_for_year(idx, net, 2010)}
    assert recs[("p0", "p2")].distance == 1  # a-b-c: b authored p0
    assert recs[("p1", "p2")].distance == 0
    assert recs[("p0", "p3")].distance == 0
    assert recs[("old", "p4")].distance == INFINITE
    assert all(r.citing_year == 2010 for r in recs.values())


def random_corpus(rng, n_authors=40, n_papers=120):
    authors = [f"a{i:02d}" for i in range(n_authors)]
    papers = []
    for i in range(n_papers):
        year = int(rng.integers(2000, 2011))
        k = int(rng.integers(1, 4))
        auth = list(rng.choice(authors, size=k, replace=False))
        refs = [f"q{j:03d}" for j in rng.choice(n_papers, size=int(rng.integers(0, 5)), replace=False) if j != i]
        papers.append((f"q{i:03d}", year, auth, refs))
    return make_corpus(*papers)


@pytest.mark.parametrize("seed", range(6))
def test_year_table_matches_floyd_warshall(seed):
    rng = np.random.default_rng(seed)
    idx = random_corpus(rng)
    for t in idx.citation_years:
        net = build_window_graph(idx, t)
        pos = net.node_index
        D = floyd_warshall(net.n_nodes, list(net.edges()))
        table = distance_table_for_year(idx, net, t)
        assert list(zip(table.cited, table.citing)) == list(idx.citations_by_year[t])
        for r in table.records():
            want = oracle(D, pos, idx.papers[r.cited_paper_id].author_ids, idx.papers[r.citing_paper_id].author_ids)
            assert r.distance == want


def test_workers_and_batching_do_not_change_output(monkeypatch):
    # run real threads even on a single-core machine
    monkeypatch.setattr("xindex.distance.thread_count", lambda workers: workers)
    idx = random_corpus(np.random.default_rng(99), n_authors=80, n_papers=400)
    for t in idx.citation_years[-3:]:
        net = build_window_graph(idx, t)
        base = distance_table_for_year(idx, net, t)
        for kw in ({"workers": 4}, {"batch_size": 3}, {"workers": 3, "batch_size": 5}):
            other = distance_table_for_year(idx, net, t, **kw)
            assert other.records() == base.records()


def test_thread_count_is_capped_by_cores():
    assert thread_count(1) == 1
    assert 1 <= thread_count(10_000) < 10_000


def test_depth_cap_marks_lower_bounds_and_blocks_d_bar():
    idx = make_corpus(("p0", 2010, "ab", []), ("p1", 2010, "bc", []), ("p2", 2010, "cd", []),
                      ("p3", 2010, "d", ["p0"]), ("p4", 2010, "b", ["p1"]))
    net = build_window_graph(idx, 2010)
    full = {r.cited_paper_id: r for r in distances_for_year(idx, net, 2010)}
    assert full["p0"].distance == 2 and not full["p0"].capped
    capped = {r.cited_paper_id: r for r in distances_for_year(idx, net, 2010, depth_cap=1)}
    assert capped["p0"].capped and capped["p0"].distance == 1
    assert capped["p1"] == full["p1"]
    assert format_distance(1, True) == ">=1"
    with pytest.raises(DistanceUndefined):
        average_citation_distance(distance_table_for_year(idx, net, 2010, depth_cap=1), None, idx, net)


def rec(p, q, d, year=2010):
    return CitationDistanceRecord(p, q, year, d)


def test_d_bar_examples():
    idx = make_corpus(("p0", 2009, "a", []), ("p1", 2009, "b", []), ("p2", 2010, "c", ["p0"]),
                      ("p3", 2010, "bc", []))
    net = PATH
    lcc = largest_connected_component(net)
    ctx = average_citation_distance([rec("p0", "p2", 3)], lcc, idx, net)
    assert ctx.d_bar == 3 and ctx.lambda_ == pytest.approx(1 / 3) and ctx.valid_pair_count == 1
    ctx = average_citation_distance([rec("p0", "p2", 2), rec("p1", "p2", 4)], lcc, idx, net)
    assert ctx.d_bar == 3
    with pytest.raises(DistanceUndefined):
        average_citation_distance([rec("p0", "p2", 2)], {"zz"}, idx, net)


def test_fill_year_contexts_prefers_earlier_year():
    got = fill_year_contexts({2001: None, 2002: YearContext(2002, 2.0, 5), 2003: None, 2004: YearContext(2004, 3.0, 1)},
                             [2001, 2002, 2003, 2004])
    assert got[2001].d_bar == 2.0 and got[2001].source_year == 2002
    assert got[2003].d_bar == 2.0 and got[2003].is_fallback
    assert not got[2004].is_fallback
    with pytest.raises(DistanceUndefined):
        fill_year_contexts({2001: None}, [2001])


def test_tables_round_trip():
    t = DistanceTable.from_records([rec("a", "b", 2), rec("c", "d", INFINITE),
                                    CitationDistanceRecord("e", "f", 2011, 4, True)])
    buf = io.StringIO()
    t.write_tsv(buf)
    buf.seek(0)
    assert DistanceTable.read_tsv(buf).records() == t.records()
    assert parse_distance("inf") == (INFINITE, False) and parse_distance(">=4") == (4, True)

    ctxs = {2010: YearContext(2010, 2.2872250023604948, 10), 2011: YearContext(2011, 2.2872250023604948, 0, 2010)}
    buf = io.StringIO()
    write_year_contexts(ctxs, buf)
    buf.seek(0)
    assert read_year_contexts(buf) == ctxs


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_pair_distance_is_symmetric(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 40))
    names = [f"u{i}" for i in range(n)]
    net = network_from_edges([(names[u], names[v]) for u, v in random_graph(rng, n, 2.5 / n)], nodes=names)
    p = list(rng.choice(names, size=2, replace=False))
    q = list(rng.choice(names, size=3, replace=False))
    assert paper_pair_distance(net, p, q) == paper_pair_distance(net, q, p)
