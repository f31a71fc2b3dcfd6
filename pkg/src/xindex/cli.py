"""Command-line entry point: ``xindex <stage> [flags]``.

Stages share a workspace directory (``--workspace``, else the
``XINDEX_WORKSPACE`` environment variable, else ``./xindex-workspace``).
Exit status is 0 on success, 1 for invalid flags or unusable input, and 2
when a prerequisite stage has not been run.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Sequence

from . import __version__, pipeline
from .corpus import CorpusError
from .metrics import METRIC_NAMES
from .synth import ArchetypeProfile, SynthConfig, default_hp_profile, default_ta_profile

EXIT_OK, EXIT_USAGE, EXIT_MISSING = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected an integer >= 1, got {text}")
    return v


def _nonneg(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected an integer >= 0, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--workspace", type=Path, default=None, help="workspace directory")
    common.add_argument("--seed", type=int, default=0, help="root seed for every random substream")
    common.add_argument("-v", "--verbose", action="store_true")

    years = _Parser(add_help=False)
    years.add_argument("--year", type=int, action="append", dest="year_list", help="single year (repeatable)")
    years.add_argument("--from", type=int, dest="year_from")
    years.add_argument("--to", type=int, dest="year_to")
    years.add_argument("--window", type=_positive, default=5, help="collaboration window in years")
    years.add_argument("--workers", type=_positive, default=1)

    p = _Parser(prog="xindex", description="Distance-weighted citation indices.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("ingest", parents=[common], help="parse a JSON-lines corpus into the workspace")
    s.add_argument("--input", type=Path, required=True)

    s = sub.add_parser("graph", parents=[common, years], help="collaboration graphs and LCC statistics")
    s.add_argument("--sample-pairs", type=_nonneg, default=1000)
    s.add_argument("--exact-threshold", type=_nonneg, default=2000,
                   help="LCC size up to which the mean path is computed exactly")

    s = sub.add_parser("distances", parents=[common, years], help="citation distances and yearly d-bar")
    s.add_argument("--depth-cap", type=_positive, default=None)

    s = sub.add_parser("metrics", parents=[common], help="np, tc, h, c, x for every author")
    s.add_argument("--as-of", type=int, required=True, dest="as_of")

    s = sub.add_parser("rank-compare", parents=[common], help="rank shifts of a cohort between two metrics")
    s.add_argument("--cohort", type=Path)
    s.add_argument("--tiers", type=Path)
    s.add_argument("--group1", default="T1")
    s.add_argument("--group2", default="T3")
    s.add_argument("--metric", choices=METRIC_NAMES, default="x")
    s.add_argument("--baseline", choices=METRIC_NAMES, default="np")
    s.add_argument("--alternative", choices=("less", "greater"), default="less")
    s.add_argument("--as-of", type=int, dest="as_of")

    s = sub.add_parser("trajectory", parents=[common], help="ten-year career series and features")
    s.add_argument("--metric", choices=METRIC_NAMES, default="x")
    s.add_argument("--min-citations", type=_nonneg, default=10)

    s = sub.add_parser("cluster", parents=[common], help="k-means over trajectory features")
    s.add_argument("--metric", choices=METRIC_NAMES, default="x")
    s.add_argument("--k-min", type=_positive, default=2)
    s.add_argument("--k-max", type=_positive, default=10)
    s.add_argument("--k", type=_positive, default=None, help="force k instead of the silhouette optimum")
    s.add_argument("--flags", type=Path, help="author ids to test for enrichment")

    s = sub.add_parser("synth", parents=[common], help="generate a synthetic corpus with planted archetypes")
    d = SynthConfig()
    s.add_argument("--from", type=int, dest="year_from", default=d.start_year)
    s.add_argument("--to", type=int, dest="year_to", default=d.end_year)
    s.add_argument("--authors", type=_positive, default=d.n_background_authors)
    s.add_argument("--papers-per-year", type=_positive, default=d.background_papers_per_year)
    s.add_argument("--communities", type=_positive, default=d.community_count)
    s.add_argument("--references", type=_nonneg, default=d.references_per_paper)
    s.add_argument("--hp-count", type=_nonneg, default=d.hp_profile.count)
    s.add_argument("--ta-count", type=_nonneg, default=d.ta_profile.count)
    return p


def _years(args, available: list[int]) -> list[int] | None:
    if args.year_list:
        return sorted(set(args.year_list))
    if args.year_from is None and args.year_to is None:
        return None
    lo = args.year_from if args.year_from is not None else min(available, default=0)
    hi = args.year_to if args.year_to is not None else max(available, default=0)
    if lo > hi:
        raise ValueError(f"--from {lo} is after --to {hi}")
    return list(range(lo, hi + 1))


def _dispatch(args, ws: pipeline.Workspace) -> None:
    cmd = args.command
    if cmd == "ingest":
        summary = pipeline.run_ingest(ws, args.input)
        json.dump(summary, sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")
    elif cmd in ("graph", "distances"):
        ws.require(pipeline.INDEX_FILE, "ingest")
        if cmd == "graph":
            years = _years(args, ws.load_index().years)
            pipeline.run_graph(ws, years, args.window, args.sample_pairs, args.exact_threshold, args.seed,
                               args.workers)
        else:
            years = _years(args, ws.load_index().citation_years)
            pipeline.run_distances(ws, years, args.window, args.workers, args.depth_cap)
    elif cmd == "metrics":
        print(pipeline.run_metrics(ws, args.as_of))
    elif cmd == "rank-compare":
        path, results = pipeline.run_rank_compare(ws, args.metric, args.baseline, args.alternative, args.as_of,
                                                  args.cohort, args.tiers, args.group1, args.group2)
        print("\t".join(pipeline.TEST_HEADER))
        for label, r in results:
            print(f"{label}\t{r.statistic!r}\t{r.p_value!r}\t{r.n}\t{r.alternative}\t{r.method}")
    elif cmd == "trajectory":
        for path in pipeline.run_trajectory(ws, args.metric, args.min_citations):
            print(path)
    elif cmd == "cluster":
        if args.k_min > args.k_max:
            raise ValueError("--k-min exceeds --k-max")
        for path in pipeline.run_cluster(ws, args.metric, args.k_min, args.k_max, args.k, args.seed, args.flags):
            print(path)
    elif cmd == "synth":
        hp, ta = default_hp_profile(), default_ta_profile()
        config = SynthConfig(
            seed=args.seed, start_year=args.year_from, end_year=args.year_to,
            n_background_authors=args.authors, background_papers_per_year=args.papers_per_year,
            community_count=args.communities, references_per_paper=args.references,
            hp_profile=ArchetypeProfile(**{**hp.__dict__, "count": args.hp_count}),
            ta_profile=ArchetypeProfile(**{**ta.__dict__, "count": args.ta_count}),
        )
        config.validate()
        for path in pipeline.run_synth(ws, config):
            print(path)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help, --version and flag errors
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    ws = pipeline.Workspace(args.workspace if args.workspace is not None else pipeline.default_workspace())
    try:
        _dispatch(args, ws)
    except pipeline.MissingArtifact as exc:
        print(f"xindex {args.command}: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except (ValueError, KeyError, CorpusError, OSError) as exc:
        print(f"xindex {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
