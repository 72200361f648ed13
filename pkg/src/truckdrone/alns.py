"""Adaptive Large Neighborhood Search over truck tours.

Destroy operators: random, Shaw-related (distance relatedness), worst-arc
(detour cost). Repair: global greedy insertion. Operator weights are
smoothed per segment from the classic sigma scores; acceptance follows a
simulated-annealing criterion with its own geometric schedule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import TravelMatrices
from .simulator import tour_length


@dataclass(frozen=True)
class ALNSParams:
    iterations: int = 2000
    destroy_fraction: float = 0.2
    segment_length: int = 50
    reaction: float = 0.2
    sigma_best: float = 5.0
    sigma_better: float = 2.0
    sigma_accepted: float = 1.0
    accept_T0: float = 0.05       # scaled by initial tour length
    accept_cooling: float = 0.9985
    p_shaw: float = 6.0           # relatedness randomization exponent
    p_worst: float = 3.0          # detour randomization exponent

    def __post_init__(self):
        if not (0 < self.destroy_fraction < 1):
            raise ValueError("destroy_fraction must be in (0,1)")
        if not (self.sigma_best >= self.sigma_better >= self.sigma_accepted >= 0):
            raise ValueError("need sigma_best >= sigma_better >= sigma_accepted >= 0")
        if not (0 < self.reaction <= 1):
            raise ValueError("reaction must be in (0,1]")


def _check_q(tour, q):
    n_cust = len(tour) - 2
    if not (1 <= q < n_cust):
        raise ValueError(f"q={q} out of range for a tour with {n_cust} customers")


def random_removal(tour: tuple[int, ...], q: int,
                   rng: np.random.Generator) -> tuple[tuple[int, ...], list[int]]:
    """Remove q uniformly chosen customers."""
    _check_q(tour, q)
    interior = list(tour[1:-1])
    picks = rng.choice(len(interior), size=q, replace=False)
    removed = sorted(interior[int(i)] for i in picks)
    remaining = tuple(c for c in tour if c == 0 or c not in set(removed))
    return remaining, removed


def shaw_removal(tour: tuple[int, ...], q: int, mats: TravelMatrices,
                 rng: np.random.Generator, p_shaw: float = 6.0) -> tuple[tuple[int, ...], list[int]]:
    """Remove spatially related customers around a random seed.

    Relatedness(i, j) = d[i][j]; each step picks a random already-removed
    customer and removes one of the most related remaining ones, biased by
    the randomization exponent (larger p_shaw = greedier).
    """
    _check_q(tour, q)
    d = mats.d
    interior = list(tour[1:-1])
    seed = interior[int(rng.integers(0, len(interior)))]
    removed = [seed]
    remaining = [c for c in interior if c != seed]
    while len(removed) < q:
        ref = removed[int(rng.integers(0, len(removed)))]
        ranked = sorted(remaining, key=lambda c: (d[ref][c], c))
        pick = ranked[int(len(ranked) * rng.random() ** p_shaw)]
        removed.append(pick)
        remaining.remove(pick)
    removed.sort()
    kept = tuple(c for c in tour if c == 0 or c not in set(removed))
    return kept, removed


def worst_removal(tour: tuple[int, ...], q: int, mats: TravelMatrices,
                  rng: np.random.Generator, p_worst: float = 3.0) -> tuple[tuple[int, ...], list[int]]:
    """Remove customers with the largest detour d[prev][i]+d[i][next]-d[prev][next]."""
    _check_q(tour, q)
    d = mats.d
    cur = list(tour)
    removed = []
    for _ in range(q):
        costs = []
        for pos in range(1, len(cur) - 1):
            a, b, c = cur[pos - 1], cur[pos], cur[pos + 1]
            costs.append((d[a][b] + d[b][c] - d[a][c], b, pos))
        costs.sort(key=lambda t: (-t[0], t[1]))
        pick = costs[int(len(costs) * rng.random() ** p_worst)]
        removed.append(pick[1])
        del cur[pick[2]]
    removed.sort()
    return tuple(cur), removed


def greedy_insertion(partial: tuple[int, ...], removed: list[int],
                     mats: TravelMatrices) -> tuple[int, ...]:
    """Repeatedly insert the globally cheapest (customer, position) pair."""
    if not removed:
        raise ValueError("removed set is empty")
    d = mats.d
    cur = list(partial)
    pending = sorted(removed)
    while pending:
        best = None
        for c in pending:
            for pos in range(1, len(cur)):
                a, b = cur[pos - 1], cur[pos]
                cost = d[a][c] + d[c][b] - d[a][b]
                key = (cost, c, pos)
                if best is None or key < best:
                    best = key
        _, c, pos = best
        cur.insert(pos, c)
        pending.remove(c)
    return tuple(cur)


_DESTROY_NAMES = ("random", "shaw", "worst")


def alns_run(tour: tuple[int, ...], mats: TravelMatrices,
             p: ALNSParams, rng: np.random.Generator,
             return_weights: bool = False):
    """Run the adaptive destroy/repair loop; returns the best tour seen."""
    d = mats.d
    n_cust = len(tour) - 2
    if n_cust < 3:
        return (tuple(tour), {}) if return_weights else tuple(tour)
    q = max(1, min(n_cust - 1, round(p.destroy_fraction * n_cust)))

    cur = tuple(tour)
    cur_len = tour_length(cur, d)
    best, best_len = cur, cur_len
    T = p.accept_T0 * cur_len
    weights = {name: 1.0 for name in _DESTROY_NAMES}
    scores = {name: 0.0 for name in _DESTROY_NAMES}
    uses = {name: 0 for name in _DESTROY_NAMES}

    for it in range(1, p.iterations + 1):
        total = sum(weights.values())
        probs = [weights[name] / total for name in _DESTROY_NAMES]
        name = _DESTROY_NAMES[int(rng.choice(len(_DESTROY_NAMES), p=probs))]
        if name == "random":
            partial, removed = random_removal(cur, q, rng)
        elif name == "shaw":
            partial, removed = shaw_removal(cur, q, mats, rng, p.p_shaw)
        else:
            partial, removed = worst_removal(cur, q, mats, rng, p.p_worst)
        cand = greedy_insertion(partial, removed, mats)
        cand_len = tour_length(cand, d)
        uses[name] += 1

        delta = cand_len - cur_len
        accepted = delta < 0 or (T > 0 and rng.random() < math.exp(-delta / T))
        if cand_len < best_len - 1e-12:
            scores[name] += p.sigma_best
            best, best_len = cand, cand_len
        elif delta < -1e-12:
            scores[name] += p.sigma_better
        elif accepted:
            scores[name] += p.sigma_accepted
        if accepted:
            cur, cur_len = cand, cand_len
        T *= p.accept_cooling

        if it % p.segment_length == 0:
            for nm in _DESTROY_NAMES:
                if uses[nm] > 0:
                    weights[nm] = ((1 - p.reaction) * weights[nm]
                                   + p.reaction * scores[nm] / uses[nm])
                    weights[nm] = max(weights[nm], 1e-6)
                scores[nm] = 0.0
                uses[nm] = 0

    if return_weights:
        return best, dict(weights)
    return best
