"""Scholar cohort filters and cohort/tier file readers."""
from __future__ import annotations

from typing import Iterable, Mapping, Sequence

import numpy as np

from ..corpus import CorpusIndex
from ..metrics import AuthorshipIndex, ScholarMetrics

HP_THRESHOLD = 72
MIN_TRAJECTORY_CITATIONS = 10


def hyperprolific(corpus: CorpusIndex, threshold: int = HP_THRESHOLD, years: Iterable[int] | None = None,
                  auth: AuthorshipIndex | None = None) -> list[str]:
    """Authors with at least ``threshold`` papers in some single calendar year."""
    auth = auth or AuthorshipIndex(corpus)
    allowed = None if years is None else set(years)
    hit = np.zeros(len(auth.author_ids), dtype=bool)
    for y, counts in auth.papers_per_year().items():
        if allowed is None or y in allowed:
            hit |= counts >= threshold
    return [auth.author_ids[i] for i in np.flatnonzero(hit)]


def early_career(metrics: Sequence[ScholarMetrics], first_year: Mapping[str, int],
                 min_years: int = 5, max_years: int = 10, min_citations: int = 1) -> list[str]:
    """Scholars 5-10 years past their first publication at the evaluation year, with some citations."""
    out = []
    for m in metrics:
        elapsed = m.as_of_year - first_year[m.author_id]
        if min_years <= elapsed <= max_years and m.tc >= min_citations:
            out.append(m.author_id)
    return out


def trajectory_cohort(first_year: np.ndarray, tc_series: np.ndarray, last_year: int,
                      min_citations: int = MIN_TRAJECTORY_CITATIONS) -> np.ndarray:
    """Mask of scholars whose ten career years are observed and who hold enough citations by year ten."""
    complete = first_year + tc_series.shape[1] - 1 <= last_year
    end_tc = np.where(complete, np.nan_to_num(tc_series[:, -1], nan=0.0), 0.0)
    return complete & (end_tc >= min_citations)


def read_author_file(path) -> list[tuple[str, int | None]]:
    """Author ids one per line, optionally followed by a tab and a year (e.g. an award year)."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            year = int(parts[1]) if len(parts) > 1 and parts[1].strip() else None
            out.append((parts[0].strip(), year))
    return out


def read_tier_file(path) -> dict[str, str]:
    """``author_id<TAB>tier`` lines; a header line starting with ``author_id`` is skipped."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#") or line.startswith("author_id\t"):
                continue
            author, tier = line.split("\t")[:2]
            out[author.strip()] = tier.strip()
    return out
