"""Mann-Whitney U test and mean absolute error for comparing score samples."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InputError

EXACT_MAX_N = 20  # pooled size up to which "auto" computes the exact null


@dataclass(frozen=True)
class MannWhitneyResult:
    u: float  # U statistic of the first sample
    p_value: float
    method: str


def rankdata(values: Sequence[float]) -> np.ndarray:
    """1-based ranks; ties share the mean of their positions."""
    v = np.asarray(values, dtype=float)
    order = np.argsort(v, kind="mergesort")
    ranks = np.empty(len(v))
    sv = v[order]
    i = 0
    while i < len(v):
        j = i
        while j + 1 < len(v) and sv[j + 1] == sv[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def _exact_p(doubled_ranks: np.ndarray, n1: int, observed: int) -> float:
    """Two-sided permutation p-value of the doubled rank sum of sample 1.

    Counts subsets of size n1 by their doubled rank sum with a knapsack DP;
    the null distribution is symmetric about its mean.
    """
    total = int(doubled_ranks.sum())
    # ways[j][s]: subsets of size j with doubled rank sum s
    ways = np.zeros((n1 + 1, total + 1), dtype=object)
    ways[0][0] = 1
    for r in doubled_ranks.astype(int):
        for j in range(n1, 0, -1):
            ways[j][r:] = ways[j][r:] + ways[j - 1][:total + 1 - r]
    dist = ways[n1]
    n_total = sum(dist)
    centre2 = n1 * total  # twice the mean doubled sum, times n
    n_pool = len(doubled_ranks)
    dev_obs = abs(n_pool * observed - centre2)
    hits = sum(int(c) for s, c in enumerate(dist)
               if c and abs(n_pool * s - centre2) >= dev_obs)
    return min(1.0, hits / n_total)


def mann_whitney_u(sample_a: Sequence[float], sample_b: Sequence[float],
                   method: str = "auto", continuity: bool = True) -> MannWhitneyResult:
    """Two-sided Mann-Whitney U test.

    ``method`` is "exact" (permutation distribution, ties included),
    "asymptotic" (normal approximation with tie correction) or "auto", which
    is exact for pooled sizes up to ``EXACT_MAX_N``.
    """
    a = np.asarray(sample_a, dtype=float)
    b = np.asarray(sample_b, dtype=float)
    n1, n2 = len(a), len(b)
    if n1 < 3 or n2 < 3:
        raise InputError("both samples need at least 3 values")
    ranks = rankdata(np.concatenate([a, b]))
    r1 = float(ranks[:n1].sum())
    u1 = r1 - n1 * (n1 + 1) / 2.0
    if method == "auto":
        method = "exact" if n1 + n2 <= EXACT_MAX_N else "asymptotic"
    if method == "exact":
        doubled = np.rint(2 * ranks).astype(int)
        p = _exact_p(doubled, n1, int(round(2 * r1)))
        return MannWhitneyResult(u1, p, "exact")
    if method != "asymptotic":
        raise InputError(f"unknown method {method!r}")
    n = n1 + n2
    _, counts = np.unique(ranks, return_counts=True)
    tie = float(((counts ** 3) - counts).sum())
    var = n1 * n2 / 12.0 * ((n + 1) - tie / (n * (n - 1)))
    if var <= 0:
        return MannWhitneyResult(u1, 1.0, "asymptotic")
    diff = abs(u1 - n1 * n2 / 2.0)
    if continuity:
        diff = max(diff - 0.5, 0.0)
    z = diff / math.sqrt(var)
    p = math.erfc(z / math.sqrt(2.0))
    return MannWhitneyResult(u1, min(1.0, p), "asymptotic")


def mae(sample_a: Sequence[float], sample_b: Sequence[float]) -> float:
    a = np.asarray(sample_a, dtype=float)
    b = np.asarray(sample_b, dtype=float)
    if len(a) != len(b):
        raise InputError("samples differ in length")
    if len(a) == 0:
        raise InputError("mae of empty samples")
    return float(np.mean(np.abs(a - b)))
