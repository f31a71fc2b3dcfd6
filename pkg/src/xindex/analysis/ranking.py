from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np
from scipy.stats import rankdata


@dataclass(frozen=True)
class RankTable:
    """Fractional ranks, 1 = highest metric value; ties share the mean of the ranks they span."""

    metric_name: str
    ranks: Mapping[str, float]

    def __getitem__(self, author_id: str) -> float:
        return self.ranks[author_id]

    def __contains__(self, author_id) -> bool:
        return author_id in self.ranks

    def __len__(self) -> int:
        return len(self.ranks)


def rank_scholars(values: Mapping[str, float], metric_name: str = "") -> RankTable:
    if not values:
        raise ValueError("cannot rank an empty population")
    authors = sorted(values)
    v = np.array([values[a] for a in authors], dtype=np.float64)
    if np.isnan(v).any():
        raise ValueError("metric values contain NaN")
    r = rankdata(-v, method="average")
    return RankTable(metric_name, {a: float(x) for a, x in zip(authors, r)})


def ranking_delta(rank_x: RankTable, rank_baseline: RankTable, cohort: Iterable[str]) -> dict[str, float]:
    """``rank_x - rank_baseline`` per cohort member; negative means x ranks the scholar higher."""
    out = {}
    for a in cohort:
        if a not in rank_x or a not in rank_baseline:
            table = rank_x.metric_name if a not in rank_x else rank_baseline.metric_name
            raise KeyError(f"cohort member {a!r} missing from rank table {table!r}")
        out[a] = rank_x[a] - rank_baseline[a]
    return out
