import io
import json

import pytest
from hypothesis import given, settings, strategies as st

from xindex.corpus import (
    CorpusError,
    DuplicatePaperError,
    PaperRecord,
    build_index,
    parse_records,
    read_records,
    serialize_records,
)

from conftest import make_corpus


def lines(*objs):
    return io.BytesIO(b"".join(json.dumps(o).encode() + b"\n" for o in objs))


def test_well_formed_record():
    recs, rep = parse_records(lines({"id": "p1", "year": 2005, "authors": [{"id": "a1"}, {"id": "a2"}],
                                     "references": ["p0"], "title": "ignored"}))
    assert recs == [PaperRecord("p1", 2005, ("a1", "a2"), ("p0",))]
    assert rep.rejected == 0 and rep.lines_read == 1


def test_missing_year_rejected():
    recs, rep = parse_records(lines({"id": "p1", "authors": [{"id": "a1"}]}))
    assert recs == []
    assert rep.rejected == 1 and rep.reject_reasons == {"missing_year": 1}


def test_duplicate_author_deduplicated_with_warning():
    recs, rep = parse_records(lines({"id": "p1", "year": 2001, "authors": [{"id": "a"}, {"id": "b"}, {"id": "a"}]}))
    assert recs[0].author_ids == ("a", "b")
    assert rep.warnings["duplicate_author"] == 1


@pytest.mark.parametrize("obj, reason", [
    ({"id": "p", "year": 1800, "authors": [{"id": "a"}]}, "year_out_of_range"),
    ({"id": "p", "year": "2001", "authors": [{"id": "a"}]}, "bad_year"),
    ({"id": "p", "year": 2001, "authors": []}, "empty_authors"),
    ({"id": "p", "year": 2001}, "missing_authors"),
    ({"year": 2001, "authors": [{"id": "a"}]}, "missing_id"),
    ({"id": "p", "year": 2001, "authors": [{"id": "a"}], "references": "q"}, "bad_references"),
    ([1, 2], "not_an_object"),
])
def test_rejections(obj, reason):
    recs, rep = parse_records(lines(obj))
    assert recs == [] and rep.reject_reasons == {reason: 1}


def test_bad_lines_do_not_abort_stream():
    stream = io.BytesIO(b'{"id": "a", "year": 2000, "authors": [{"id": "x"}]}\n'
                        b'not json\n\n\xff\xfe\n'
                        b'{"id": "b", "year": 2001, "authors": [{"id": "x"}], "references": ["a", "b", "a"]}\n')
    recs, rep = parse_records(stream)
    assert [r.paper_id for r in recs] == ["a", "b"]
    assert recs[1].reference_ids == ("a",)
    assert rep.reject_reasons == {"malformed_json": 1, "bad_encoding": 1}
    assert rep.lines_read == 4
    assert rep.warnings["self_reference"] == 1 and rep.warnings["duplicate_reference"] == 1


def test_unreadable_stream_is_fatal(tmp_path):
    with pytest.raises(CorpusError):
        read_records(tmp_path / "nope.jsonl")

    class Broken:
        def __iter__(self):
            raise OSError("disk gone")

    with pytest.raises(CorpusError):
        parse_records(Broken())


def test_record_invariants():
    with pytest.raises(ValueError):
        PaperRecord("p", 2000, (), ())
    with pytest.raises(ValueError):
        PaperRecord("p", 2000, ("a", "a"), ())
    with pytest.raises(ValueError):
        PaperRecord("p", 2000, ("a",), ("p",))


def test_index_examples():
    idx = make_corpus(("p1", 2008, "a", []), ("p2", 2010, "b", ["p1", "pX"]))
    assert dict(idx.citations_by_year) == {2010: (("p1", "p2"),)}
    assert idx.dangling_references == 1
    idx = make_corpus(*[(f"p{i}", 2000 + i, ["a1"], []) for i in range(3)])
    assert len(idx.author_papers["a1"]) == 3


def test_duplicate_paper_id_names_the_id():
    with pytest.raises(DuplicatePaperError, match="p1"):
        make_corpus(("p1", 2000, "a", []), ("p1", 2001, "b", []))


def test_citation_keyed_by_citing_year_even_if_cited_is_later():
    idx = make_corpus(("p1", 2012, "a", []), ("p2", 2010, "b", ["p1"]))
    assert dict(idx.citations_by_year) == {2010: (("p1", "p2"),)}


@st.composite
def corpora(draw):
    n = draw(st.integers(1, 15))
    ids = [f"p{i}" for i in range(n)]
    extra = ["ghost1", "ghost2"]
    recs = []
    for i, pid in enumerate(ids):
        authors = draw(st.lists(st.sampled_from("abcdefg"), min_size=1, max_size=3, unique=True))
        refs = draw(st.lists(st.sampled_from(ids[:i] + ids[i + 1:] + extra), max_size=5, unique=True))
        recs.append(PaperRecord(pid, draw(st.integers(1995, 2005)), tuple(authors), tuple(refs)))
    return recs


@settings(max_examples=60, deadline=None)
@given(corpora())
def test_round_trip_and_conservation(recs):
    data = serialize_records(recs)
    back, rep = parse_records(io.BytesIO(data))
    assert back == recs and rep.rejected == 0
    a, b = build_index(recs), build_index(back)
    flat = lambda idx: sorted((y, c) for y, pairs in idx.citations_by_year.items() for c in pairs)  # noqa: E731
    assert flat(a) == flat(b)
    known = {r.paper_id for r in recs}
    valid = sum(sum(ref in known for ref in r.reference_ids) for r in recs)
    assert a.citation_count() == valid
    assert a.dangling_references == sum(len(r.reference_ids) for r in recs) - valid
    # author_papers inverts the author lists
    pairs = {(aid, r.paper_id) for r in recs for aid in r.author_ids}
    assert pairs == {(aid, p) for aid, ps in a.author_papers.items() for p in ps}
    for y, cites in a.citations_by_year.items():
        assert all(a.papers[q].year == y for _, q in cites)
