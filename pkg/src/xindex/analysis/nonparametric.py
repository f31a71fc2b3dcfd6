"""One-sided Wilcoxon signed-rank and Mann-Whitney U tests.

Small samples use the exact null distribution (conditional on the tie
pattern for Wilcoxon); larger ones a normal approximation with tie and
continuity corrections.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Literal, Sequence

import numpy as np
from scipy.stats import norm, rankdata

Alternative = Literal["less", "greater"]

WILCOXON_EXACT_MAX_N = 25
MWU_EXACT_MAX_CELLS = 400


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float
    n: int
    alternative: str
    method: str = "exact"

    __test__ = False  # not a pytest class


def _check_alternative(alternative: str) -> None:
    if alternative not in ("less", "greater"):
        raise ValueError(f"alternative must be 'less' or 'greater', got {alternative!r}")


def _clip(p: float) -> float:
    return min(1.0, max(0.0, p))


def signed_rank_null_counts(doubled_ranks: Sequence[int]) -> np.ndarray:
    """Number of sign assignments giving each value of 2*W+ (index = 2*W+)."""
    total = int(sum(doubled_ranks))
    counts = np.zeros(total + 1, dtype=np.float64)
    counts[0] = 1.0
    for r in doubled_ranks:
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[:total + 1 - r]
        counts = counts + shifted
    return counts


def wilcoxon_signed_rank(deltas: Sequence[float], alternative: Alternative = "less") -> TestResult:
    """Test whether the paired differences are centred below (``less``) or above zero.

    Zero differences are dropped before ranking.  The statistic is W+, the
    rank sum of the positive differences.
    """
    _check_alternative(alternative)
    d = np.asarray(deltas, dtype=np.float64)
    d = d[d != 0]
    n = len(d)
    if n == 0:
        raise ValueError("degenerate sample: every difference is zero")
    ranks = rankdata(np.abs(d), method="average")
    w_plus = float(ranks[d > 0].sum())

    if n <= WILCOXON_EXACT_MAX_N:
        doubled = np.rint(2 * ranks).astype(np.int64)
        counts = signed_rank_null_counts(doubled)
        obs = int(round(2 * w_plus))
        total = 2.0 ** n
        if alternative == "less":
            p = counts[:obs + 1].sum() / total
        else:
            p = counts[obs:].sum() / total
        return TestResult(w_plus, _clip(float(p)), n, alternative, "exact")

    mean = n * (n + 1) / 4
    _, tie_counts = np.unique(np.abs(d), return_counts=True)
    var = n * (n + 1) * (2 * n + 1) / 24 - float((tie_counts ** 3 - tie_counts).sum()) / 48
    sd = math.sqrt(var)
    if alternative == "less":
        p = norm.cdf((w_plus - mean + 0.5) / sd)
    else:
        p = norm.sf((w_plus - mean - 0.5) / sd)
    return TestResult(w_plus, _clip(float(p)), n, alternative, "normal")


@lru_cache(maxsize=None)
def _u_counts(m: int, n: int) -> tuple[int, ...]:
    """Number of orderings of m group-1 and n group-2 items giving each U (group-1 wins)."""
    if m == 0 or n == 0:
        return (1,)
    # largest item from group 1 beats all n group-2 items; otherwise it is a group-2 item
    a = _u_counts(m - 1, n)
    b = _u_counts(m, n - 1)
    out = [0] * (m * n + 1)
    for u, c in enumerate(a):
        out[u + n] += c
    for u, c in enumerate(b):
        out[u] += c
    return tuple(out)


def mann_whitney_null_counts(n1: int, n2: int) -> np.ndarray:
    return np.array(_u_counts(n1, n2), dtype=np.float64)


def mann_whitney_u(group1: Sequence[float], group2: Sequence[float], alternative: Alternative = "less") -> TestResult:
    """Test whether ``group1`` tends to be smaller (``less``) or larger than ``group2``.

    The statistic is U for group 1: the number of (x, y) pairs with x > y,
    ties counting one half.
    """
    _check_alternative(alternative)
    x = np.asarray(group1, dtype=np.float64)
    y = np.asarray(group2, dtype=np.float64)
    n1, n2 = len(x), len(y)
    if n1 == 0 or n2 == 0:
        raise ValueError("both groups must be nonempty")
    pooled = np.concatenate([x, y])
    ranks = rankdata(pooled, method="average")
    u = float(ranks[:n1].sum() - n1 * (n1 + 1) / 2)
    _, tie_counts = np.unique(pooled, return_counts=True)
    has_ties = bool((tie_counts > 1).any())

    if n1 * n2 <= MWU_EXACT_MAX_CELLS and not has_ties:
        counts = mann_whitney_null_counts(n1, n2)
        obs = int(round(u))
        total = counts.sum()
        p = counts[:obs + 1].sum() / total if alternative == "less" else counts[obs:].sum() / total
        return TestResult(u, _clip(float(p)), n1 + n2, alternative, "exact")

    big_n = n1 + n2
    mean = n1 * n2 / 2
    var = n1 * n2 / 12 * ((big_n + 1) - float((tie_counts ** 3 - tie_counts).sum()) / (big_n * (big_n - 1)))
    if var <= 0:
        # every observation tied: no evidence either way
        return TestResult(u, 1.0, big_n, alternative, "normal")
    sd = math.sqrt(var)
    if alternative == "less":
        p = norm.cdf((u - mean + 0.5) / sd)
    else:
        p = norm.sf((u - mean - 0.5) / sd)
    return TestResult(u, _clip(float(p)), big_n, alternative, "normal")
