"""Cross-seed aggregation and paired Wilcoxon signed-rank tests."""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Sequence


@dataclass(frozen=True)
class AggregateStats:
    method: str
    mean: float
    se: float            # sample sd (n-1) / sqrt(n); 0 with a flag for n = 1
    n_seeds: int
    single_seed: bool = False


@dataclass(frozen=True)
class WilcoxonResult:
    n_pairs: int         # pairs retained after dropping zero differences
    z: float
    p: float             # two-sided
    r: float             # rank-biserial (W+ - W-) / (W+ + W-)
    no_effect: bool = False


def aggregate_values(method: str, values: Sequence[float]) -> AggregateStats:
    """Mean and standard error of per-seed makespans."""
    if not values:
        raise ValueError("no records for aggregation")
    n = len(values)
    mean = sum(values) / n
    if n == 1:
        return AggregateStats(method, mean, 0.0, 1, single_seed=True)
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    return AggregateStats(method, mean, math.sqrt(var / n), n)


def _signed_ranks(diffs: Sequence[float]) -> list[tuple[float, float]]:
    """(rank, diff) with average ranks for tied absolute values."""
    order = sorted(range(len(diffs)), key=lambda i: abs(diffs[i]))
    ranks = [0.0] * len(diffs)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and abs(diffs[order[j + 1]]) == abs(diffs[order[i]]):
            j += 1
        avg = (i + j) / 2 + 1
        for q in range(i, j + 1):
            ranks[order[q]] = avg
        i = j + 1
    return [(ranks[i], diffs[i]) for i in range(len(diffs))]


def _normal_sf(z: float) -> float:
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def wilcoxon_signed_rank(x: Sequence[float], y: Sequence[float],
                         exact: bool = False) -> WilcoxonResult:
    """Paired two-sided Wilcoxon signed-rank test on differences x - y.

    Zero differences are dropped; ties in |d| get average ranks. The
    default z uses the normal approximation with a 0.5 continuity
    correction toward the mean even for tiny samples (that is what the
    reported reference values use). With exact=True the p-value instead
    comes from enumerating all sign assignments over the retained ranks;
    z and r are reported the same way in both modes.
    """
    if len(x) != len(y) or len(x) < 2:
        raise ValueError("need paired samples of equal length >= 2")
    diffs = [a - b for a, b in zip(x, y) if a - b != 0.0]
    if not diffs:
        return WilcoxonResult(0, 0.0, 1.0, 0.0, no_effect=True)
    ranked = _signed_ranks(diffs)
    w_plus = sum(rank for rank, d in ranked if d > 0)
    w_minus = sum(rank for rank, d in ranked if d < 0)
    m = len(diffs)
    mu = m * (m + 1) / 4
    sigma = math.sqrt(m * (m + 1) * (2 * m + 1) / 24)
    if w_plus > mu:
        z = (w_plus - mu - 0.5) / sigma
    elif w_plus < mu:
        z = (w_plus - mu + 0.5) / sigma
    else:
        z = 0.0
    if exact:
        ranks = [rank for rank, _ in ranked]
        dist = [sum(r for r, s in zip(ranks, signs) if s)
                for signs in product((False, True), repeat=m)]
        le = sum(1 for w in dist if w <= w_plus) / len(dist)
        ge = sum(1 for w in dist if w >= w_plus) / len(dist)
        p = min(1.0, 2 * min(le, ge))
    else:
        p = 2 * _normal_sf(abs(z))
    r = (w_plus - w_minus) / (w_plus + w_minus)
    return WilcoxonResult(m, z, min(p, 1.0), r)
