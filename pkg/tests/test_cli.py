import json

import pytest

from xindex.cli import main

SYNTH = ["--from", "2003", "--to", "2014", "--authors", "400", "--papers-per-year", "100", "--communities", "4"]


def run(ws, *argv):
    return main([argv[0], "--workspace", str(ws), *argv[1:]])


@pytest.fixture(scope="module")
def built(tmp_path_factory):
    ws = tmp_path_factory.mktemp("ws")
    assert run(ws, "synth", "--seed", "4", *SYNTH) == 0
    assert run(ws, "ingest", "--input", str(ws / "synth" / "corpus.jsonl")) == 0
    assert run(ws, "distances") == 0
    return ws


def snapshot(ws):
    return {p.relative_to(ws).as_posix(): p.read_bytes() for p in sorted(ws.rglob("*")) if p.is_file()}


def test_invalid_flags_exit_1(tmp_path, capsys):
    assert main(["graph", "--workspace", str(tmp_path), "--window", "0"]) == 1
    assert main(["distances", "--workers", "0"]) == 1
    assert main(["frobnicate"]) == 1
    assert main([]) == 1
    assert main(["rank-compare", "--metric", "zz"]) == 1
    assert main(["metrics"]) == 1  # --as-of is required
    assert main(["--version"]) == 0


def test_missing_prerequisite_exit_2(tmp_path, capsys):
    assert run(tmp_path, "graph", "--year", "2010") == 2
    assert "ingest" in capsys.readouterr().err
    (tmp_path / "index.jsonl").write_text("")
    assert run(tmp_path, "metrics", "--as-of", "2010") == 2
    assert "distances" in capsys.readouterr().err
    assert run(tmp_path, "cluster") == 2
    assert "trajectory" in capsys.readouterr().err


def test_bad_input_exit_1(tmp_path):
    assert run(tmp_path, "ingest", "--input", str(tmp_path / "absent.jsonl")) == 1
    dup = tmp_path / "dup.jsonl"
    dup.write_text('{"id": "p", "year": 2000, "authors": [{"id": "a"}]}\n' * 2)
    assert run(tmp_path, "ingest", "--input", str(dup)) == 1


def test_ingest_prints_report(tmp_path, capsys):
    src = tmp_path / "c.jsonl"
    src.write_text('{"id": "p1", "year": 2005, "authors": [{"id": "a1"}, {"id": "a2"}], "references": ["p0"]}\n'
                   '{"id": "p2", "authors": [{"id": "a1"}]}\n')
    assert run(tmp_path, "ingest", "--input", str(src)) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["accepted"] == 1 and report["reject_reasons"] == {"missing_year": 1}
    assert report["dangling_references"] == 1


def test_workspace_from_environment(tmp_path, monkeypatch):
    src = tmp_path / "c.jsonl"
    src.write_text('{"id": "p1", "year": 2005, "authors": [{"id": "a1"}, {"id": "a2"}]}\n')
    monkeypatch.setenv("XINDEX_WORKSPACE", str(tmp_path / "envws"))
    assert main(["ingest", "--input", str(src)]) == 0
    assert main(["graph", "--year", "2005"]) == 0
    assert (tmp_path / "envws" / "graph" / "edges_2005.tsv").read_text() == "a1\ta2\n"
    assert (tmp_path / "envws" / "graph" / "stats_2005.tsv").exists()


def test_full_chain_and_idempotence(built, capsys):
    ws = built
    steps = [
        ("graph", "--year", "2010", "--sample-pairs", "200", "--exact-threshold", "50"),
        ("metrics", "--as-of", "2014"),
        ("rank-compare", "--cohort", str(ws / "synth" / "ta.txt"), "--metric", "x", "--baseline", "np",
         "--alternative", "less", "--as-of", "2014"),
        ("trajectory", "--metric", "x", "--min-citations", "1"),
        ("cluster", "--metric", "x", "--k-max", "4", "--k", "2", "--flags", str(ws / "synth" / "ta.txt")),
    ]
    for step in steps:
        assert run(ws, *step) == 0, step
    out = capsys.readouterr().out
    assert "wilcoxon_signed_rank" in out
    before = snapshot(ws)
    assert (ws / "cluster" / "x_enrichment.tsv").exists()
    manifest = json.loads((ws / "manifests" / "metrics.json").read_text())
    assert manifest["engine_version"] and "distances.tsv" in manifest["inputs"]
    assert str(ws) not in json.dumps(manifest["inputs"])
    for step in [("distances",)] + steps:
        assert run(ws, *step) == 0
    assert snapshot(ws) == before


def test_worker_count_does_not_change_outputs(built, tmp_path):
    other = tmp_path / "ws4"
    other.mkdir()
    (other / "index.jsonl").write_bytes((built / "index.jsonl").read_bytes())
    assert run(other, "distances", "--workers", "4") == 0
    for name in ("distances.tsv", "year_context.tsv", "distance_summary.tsv"):
        assert (other / name).read_bytes() == (built / name).read_bytes()


def test_rank_compare_tiers(built, tmp_path, capsys):
    tiers = tmp_path / "tiers.tsv"
    hp = (built / "synth" / "hp.txt").read_text().split()
    ta = (built / "synth" / "ta.txt").read_text().split()
    tiers.write_text("".join(f"{a}\tT1\n" for a in ta) + "".join(f"{a}\tT3\n" for a in hp))
    assert run(built, "rank-compare", "--tiers", str(tiers), "--alternative", "less", "--as-of", "2014") == 0
    assert "mann_whitney_u:T1_vs_T3" in capsys.readouterr().out


def test_inverted_year_range_exit_1(built):
    assert run(built, "graph", "--from", "2012", "--to", "2010") == 1


def test_unknown_cohort_member_exit_1(built, tmp_path):
    c = tmp_path / "c.txt"
    c.write_text("nobody\n")
    assert run(built, "rank-compare", "--cohort", str(c)) == 1
