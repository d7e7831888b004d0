"""Wilcoxon rank-sum test for comparing two sets of scores."""
from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass

EXACT_CUTOFF = 12
_EPS = 1e-9


@dataclass(frozen=True)
class RankSumResult:
    statistic: float
    p_two_sided: float
    method: str

    def as_dict(self):
        return {"W": self.statistic, "p_two_sided": self.p_two_sided, "method": self.method}


def rankdata(values):
    """Ranks starting at 1; tied values share the mean of their ranks."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j) / 2 + 1
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return ranks


def rank_sum_distribution(ranks, n_a):
    """Exact null distribution of the rank sum of ``n_a`` of the pooled ranks.

    Enumerates every assignment of ``n_a`` positions to the first sample and
    returns ``{W: probability}``.
    """
    counts = Counter()
    for combo in itertools.combinations(ranks, n_a):
        counts[sum(combo)] += 1
    total = sum(counts.values())
    return {w: c / total for w, c in sorted(counts.items())}


def _exact_p(ranks, n_a, w):
    mean = n_a * (len(ranks) + 1) / 2
    dist = rank_sum_distribution(ranks, n_a)
    observed = abs(w - mean)
    p = sum(prob for value, prob in dist.items() if abs(value - mean) >= observed - _EPS)
    return min(1.0, p)


def _normal_p(ranks, n_a, w):
    n = len(ranks)
    n_b = n - n_a
    mean = n_a * (n + 1) / 2
    ties = sum(t ** 3 - t for t in Counter(ranks).values())
    var = n_a * n_b / 12 * ((n + 1) - ties / (n * (n - 1))) if n > 1 else 0.0
    if var <= 0:
        return 1.0
    z = max(0.0, abs(w - mean) - 0.5) / math.sqrt(var)
    return min(1.0, math.erfc(z / math.sqrt(2)))


def wilcoxon_rank_sum(sample_a, sample_b, method="auto"):
    """Rank sum ``W`` of ``sample_a`` and its two-sided p-value.

    ``method="auto"`` enumerates exactly when the pooled size is at most
    12 and otherwise uses the normal approximation with tie and continuity
    corrections.
    """
    a = list(sample_a)
    b = list(sample_b)
    if not a or not b:
        raise ValueError("both samples must be non-empty")
    if method not in ("auto", "exact", "normal"):
        raise ValueError(f"unknown method {method!r}")
    ranks = rankdata(a + b)
    w = sum(ranks[:len(a)])
    if method == "auto":
        method = "exact" if len(ranks) <= EXACT_CUTOFF else "normal"
    if method == "exact":
        p = _exact_p(ranks, len(a), w)
    else:
        p = _normal_p(ranks, len(a), w)
    return RankSumResult(w, p, method)
