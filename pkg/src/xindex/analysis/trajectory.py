"""Ten-year early-career trajectories and their eleven summary features."""
from __future__ import annotations

from dataclasses import astuple, dataclass, fields
from typing import Mapping, Sequence

import numpy as np

from ..corpus import CorpusIndex
from ..distance import YearContext
from ..metrics import AuthorshipIndex, CitationArrays, metrics_table

CAREER_YEARS = 10
NEVER_NONZERO = 11
FEATURE_NAMES = (
    "early_slope", "early_mean", "early_std",
    "late_slope", "late_mean", "late_std",
    "delta_slope", "delta_mean", "delta_std",
    "first_nonzero_year", "max_increment_year",
)


@dataclass(frozen=True)
class TrajectoryFeatures:
    early_slope: float
    early_mean: float
    early_std: float
    late_slope: float
    late_mean: float
    late_std: float
    delta_slope: float
    delta_mean: float
    delta_std: float
    first_nonzero_year: int
    max_increment_year: int

    def as_array(self) -> np.ndarray:
        return np.array(astuple(self), dtype=np.float64)


assert tuple(f.name for f in fields(TrajectoryFeatures)) == FEATURE_NAMES


def _window_stats(block: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    # OLS slope against 1..5 (slope is shift-invariant in the year index)
    t = np.arange(block.shape[1], dtype=np.float64)
    tc = t - t.mean()
    mean = block.mean(axis=1)
    slope = ((block - mean[:, None]) * tc).sum(axis=1) / (tc ** 2).sum()
    std = block.std(axis=1)
    return slope, mean, std


def feature_matrix(series: np.ndarray) -> np.ndarray:
    """Rows of 10-year cumulative values -> rows of the eleven features (FEATURE_NAMES order)."""
    s = np.asarray(series, dtype=np.float64)
    if s.ndim != 2 or s.shape[1] != CAREER_YEARS:
        raise ValueError(f"expected series of length {CAREER_YEARS}, got shape {s.shape}")
    es, em, esd = _window_stats(s[:, :5])
    ls, lm, lsd = _window_stats(s[:, 5:])
    nonzero = s > 0
    first = np.where(nonzero.any(axis=1), nonzero.argmax(axis=1) + 1, NEVER_NONZERO)
    # argmax keeps the earliest maximal increment; increment k is value_k - value_{k-1}
    max_inc = np.diff(s, axis=1).argmax(axis=1) + 2
    return np.column_stack([es, em, esd, ls, lm, lsd, ls - es, lm - em, lsd - esd, first, max_inc])


def trajectory_features(x_series: Sequence[float]) -> TrajectoryFeatures:
    s = np.asarray(x_series, dtype=np.float64)
    if s.shape != (CAREER_YEARS,):
        raise ValueError(f"trajectory must have exactly {CAREER_YEARS} values, got {s.size}")
    row = feature_matrix(s[None, :])[0]
    return TrajectoryFeatures(*(float(v) for v in row[:9]), int(row[9]), int(row[10]))


def metric_series(
    corpus: CorpusIndex,
    distances,
    contexts: Mapping[int, YearContext],
    metric: str = "x",
    length: int = CAREER_YEARS,
    auth: AuthorshipIndex | None = None,
) -> tuple[list[str], np.ndarray, np.ndarray]:
    """Metric value at career years 1..length for every author.

    Career year k is calendar year ``first_publication + k - 1``.  Returns
    (author ids, first publication years, values); values are NaN for career
    years beyond the last corpus year.
    """
    auth = auth or AuthorshipIndex(corpus)
    years = corpus.years
    last = years[-1]
    n = len(auth.author_ids)
    first = auth.first_year
    cites = CitationArrays.build(distances, contexts, auth, max_year=last)
    offsets = np.arange(length)
    observed = first[:, None] + offsets[None, :] <= last

    if metric in ("x", "tc", "np"):
        # cumulative metrics: bin yearly increments by career year, then accumulate
        if metric == "np":
            a_idx = auth.pa_author
            yr = auth.paper_year[auth.pa_paper]
            w = np.ones(len(a_idx))
        else:
            keep = cites.year <= last
            a_idx, rows = auth.expand(cites.cited[keep])
            # a citation counts once both papers exist
            yr = np.maximum(cites.year[keep], auth.paper_year[cites.cited[keep]])[rows]
            w = cites.weight[keep][rows] if metric == "x" else np.ones(len(rows))
        k = np.clip(yr - first[a_idx], 0, None)
        inside = k < length
        inc = np.zeros((n, length))
        np.add.at(inc, (a_idx[inside], k[inside]), w[inside])
        out = np.cumsum(inc, axis=1)
    else:
        out = np.zeros((n, length))
        for cal in range(years[0], last + 1):
            k = cal - first
            sel = np.flatnonzero((k >= 0) & (k < length))
            if sel.size == 0:
                continue
            rows = metrics_table(corpus, distances, contexts, cal, auth=auth, cites=cites)
            vals = {m.author_id: m.value(metric) for m in rows}
            for i in sel:
                out[i, k[i]] = vals.get(auth.author_ids[i], 0.0)
    out[~observed] = np.nan
    return list(auth.author_ids), first.copy(), out
