from xindex.analysis import early_career, hyperprolific, read_author_file, read_tier_file
from xindex.metrics import ScholarMetrics

from conftest import make_corpus


def test_hyperprolific_threshold():
    papers = [(f"h{i}", 2010, ["hp", f"x{i}"], []) for i in range(72)]
    papers += [(f"g{i}", 2010 + i % 2, ["almost"], []) for i in range(100)]
    idx = make_corpus(*papers)
    assert hyperprolific(idx) == ["hp"]
    assert hyperprolific(idx, years=[2011]) == []


def test_early_career_window():
    ms = [ScholarMetrics(a, 2020, 3, tc, 1, 1, 1.0, 0) for a, tc in (("new", 5), ("mid", 5), ("old", 5), ("mute", 0))]
    first = {"new": 2018, "mid": 2013, "old": 2005, "mute": 2013}
    assert early_career(ms, first) == ["mid"]


def test_author_and_tier_files(tmp_path):
    p = tmp_path / "c.txt"
    p.write_text("# award winners\nann\t2015\n\nbob\n")
    assert read_author_file(p) == [("ann", 2015), ("bob", None)]
    t = tmp_path / "t.tsv"
    t.write_text("author_id\ttier\nann\tT1\nbob\tT3\n")
    assert read_tier_file(t) == {"ann": "T1", "bob": "T3"}
