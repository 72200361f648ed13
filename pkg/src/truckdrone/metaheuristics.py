"""Truck-tour metaheuristics: simulated annealing, tabu search, GA, VNS.

All methods use the {2-opt, relocate} neighborhood on depot-anchored
tours, take an explicit numpy Generator, and return the best tour seen,
so a fixed seed reproduces the whole trajectory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Instance, TravelMatrices
from .local_search import _best_two_opt_move, local_search, two_opt
from .simulator import tour_length


@dataclass(frozen=True)
class SAParams:
    T0: float = 1.0             # scaled by mean edge length at run time
    cooling: float = 0.995
    iters_per_temp: int = 50
    T_min: float = 1e-4

    def __post_init__(self):
        if not (0 < self.cooling < 1):
            raise ValueError("cooling must be in (0,1)")
        if self.T0 <= 0 or self.T_min <= 0 or self.T0 <= self.T_min:
            raise ValueError("need T0 > T_min > 0")


@dataclass(frozen=True)
class TabuParams:
    tenure: int = 15
    max_iters: int = 2000

    def __post_init__(self):
        if self.tenure < 1:
            raise ValueError("tenure must be >= 1")


@dataclass(frozen=True)
class GAParams:
    pop_size: int = 50
    generations: int = 200
    crossover_rate: float = 0.9
    mutation_rate: float = 0.2
    elite: int = 2

    def __post_init__(self):
        if self.pop_size < 2:
            raise ValueError("pop_size must be >= 2")
        if self.elite >= self.pop_size:
            raise ValueError("elite must be < pop_size")


@dataclass(frozen=True)
class VNSParams:
    k_max: int = 5
    max_iters: int = 500

    def __post_init__(self):
        if self.k_max < 1:
            raise ValueError("k_max must be >= 1")


# ---------------------------------------------------------------- moves

def _apply_two_opt(a: list[int], i: int, j: int) -> list[int]:
    return a[:i] + a[i:j + 1][::-1] + a[j + 1:]


def _apply_relocate(a: list[int], i: int, j: int) -> list[int]:
    node = a[i]
    rest = a[:i] + a[i + 1:]
    j_new = j - 1 if j >= i else j
    return rest[:j_new + 1] + [node] + rest[j_new + 1:]


def _draw_move(a: list[int], d: np.ndarray, rng: np.random.Generator):
    """Draw a random 2-opt or relocate move; returns (delta, new_tour)."""
    m = len(a) - 2
    if m < 2:
        return 0.0, list(a)
    if rng.random() < 0.5:
        i = int(rng.integers(1, m))
        j = int(rng.integers(i + 1, m + 1))
        delta = (d[a[i - 1]][a[j]] + d[a[i]][a[j + 1]]
                 - d[a[i - 1]][a[i]] - d[a[j]][a[j + 1]])
        return delta, _apply_two_opt(a, i, j)
    i = int(rng.integers(1, m + 1))
    choices = [j for j in range(0, m + 1) if j not in (i - 1, i)]
    j = choices[int(rng.integers(0, len(choices)))]
    removed = d[a[i - 1]][a[i]] + d[a[i]][a[i + 1]] - d[a[i - 1]][a[i + 1]]
    added = d[a[j]][a[i]] + d[a[i]][a[j + 1]] - d[a[j]][a[j + 1]]
    return added - removed, _apply_relocate(a, i, j)


# ---------------------------------------------------- simulated annealing

def simulated_annealing(tour: tuple[int, ...], mats: TravelMatrices,
                        p: SAParams, rng: np.random.Generator) -> tuple[int, ...]:
    """Metropolis acceptance exp(-delta/T) with a geometric cooling schedule."""
    d = mats.d
    cur = list(tour)
    cur_len = tour_length(cur, d)
    best, best_len = list(cur), cur_len
    n_off = max(2, len(tour) - 2)
    mean_edge = float(d.sum()) / (d.shape[0] * (d.shape[0] - 1)) if d.shape[0] > 1 else 1.0
    T = p.T0 * mean_edge
    T_min = p.T_min * mean_edge
    if n_off < 3:
        return tuple(best)
    while T > T_min:
        for _ in range(p.iters_per_temp):
            delta, cand = _draw_move(cur, d, rng)
            if delta < 0 or rng.random() < math.exp(-delta / T):
                cur = cand
                cur_len += delta
                if cur_len < best_len - 1e-12:
                    best, best_len = list(cur), cur_len
        T *= p.cooling
    return tuple(best)


# ------------------------------------------------------------ tabu search

def _relocate_gain_matrix(a: np.ndarray, d: np.ndarray):
    """gain[i-1, j] of moving customer at position i to sit after position j."""
    m = len(a) - 2
    idx = np.arange(1, m + 1)
    prev, cur, nxt = a[idx - 1], a[idx], a[idx + 1]
    removed = d[prev, cur] + d[cur, nxt] - d[prev, nxt]
    js = np.arange(0, m + 1)
    added = d[np.ix_(cur, a[js])] + d[np.ix_(cur, a[js + 1])] - d[a[js], a[js + 1]][None, :]
    gain = removed[:, None] - added
    rows = idx[:, None]
    cols = js[None, :]
    gain[(cols == rows - 1) | (cols == rows)] = -np.inf   # no-op placements
    return gain


def tabu_search(tour: tuple[int, ...], mats: TravelMatrices,
                p: TabuParams, rng: np.random.Generator) -> tuple[int, ...]:
    """Steepest non-tabu move each iteration; aspiration on new global best.

    Move attributes: the reversed endpoints' customer pair for 2-opt, the
    relocated customer for relocate.
    """
    d = mats.d
    cur = list(tour)
    cur_len = tour_length(cur, d)
    best, best_len = list(cur), cur_len
    tabu: dict[tuple, int] = {}
    m = len(tour) - 2
    if m < 2:
        return tuple(best)

    for it in range(p.max_iters):
        a = np.array(cur)
        g2 = np.empty((m, m))
        idx = np.arange(1, m + 1)
        prev_, cur_, nxt_ = a[idx - 1], a[idx], a[idx + 1]
        removed = d[prev_, cur_][:, None] + d[cur_, nxt_][None, :]
        added = d[np.ix_(prev_, cur_)] + d[np.ix_(cur_, nxt_)]
        g2[:] = removed - added
        rows = np.arange(m)
        g2[rows[:, None] >= rows[None, :]] = -np.inf
        gr = _relocate_gain_matrix(a, d)

        # flatten both neighborhoods, scan in descending-gain order
        cand = []
        for flat in np.argsort(-g2, axis=None):
            i, j = divmod(int(flat), m)
            if not np.isfinite(g2[i, j]):
                break
            cand.append((float(g2[i, j]), 0, int(idx[i]), int(idx[j])))
        for flat in np.argsort(-gr, axis=None):
            i, j = divmod(int(flat), m + 1)
            if not np.isfinite(gr[i, j]):
                break
            cand.append((float(gr[i, j]), 1, int(idx[i]), int(j)))
        cand.sort(key=lambda c: (-c[0], c[1], c[2], c[3]))

        chosen = None
        for gain, kind, i, j in cand:
            if kind == 0:
                attr = ("2opt", min(cur[i], cur[j]), max(cur[i], cur[j]))
            else:
                attr = ("rel", cur[i])
            is_tabu = tabu.get(attr, -1) > it
            aspirating = cur_len - gain < best_len - 1e-12
            if not is_tabu or aspirating:
                chosen = (gain, kind, i, j, attr)
                break
        if chosen is None:
            break
        gain, kind, i, j, attr = chosen
        cur = _apply_two_opt(cur, i, j) if kind == 0 else _apply_relocate(cur, i, j)
        cur_len -= gain
        tabu[attr] = it + p.tenure
        if cur_len < best_len - 1e-12:
            best, best_len = list(cur), cur_len
    return tuple(best)


# ------------------------------------------------------- genetic algorithm

def ordered_crossover(p1: list[int], p2: list[int], rng: np.random.Generator) -> list[int]:
    """OX on customer sequences (no depot endpoints)."""
    n = len(p1)
    if n < 2:
        return list(p1)
    i = int(rng.integers(0, n))
    j = int(rng.integers(0, n))
    if i > j:
        i, j = j, i
    child = [None] * n
    child[i:j + 1] = p1[i:j + 1]
    taken = set(p1[i:j + 1])
    fill = [c for c in p2 if c not in taken]
    pos = 0
    for idx in list(range(j + 1, n)) + list(range(0, i)):
        child[idx] = fill[pos]
        pos += 1
    return child


def _light_two_opt(perm: list[int], mats: TravelMatrices, cap: int = 10) -> list[int]:
    """Up to `cap` best-improvement reversals; the GA child clean-up pass."""
    a = np.array([0] + perm + [0])
    d = mats.d
    for _ in range(cap):
        gain, i, j = _best_two_opt_move(a, d)
        if gain <= 1e-9:
            break
        a[i:j + 1] = a[i:j + 1][::-1]
    return [int(x) for x in a[1:-1]]


def genetic_algorithm(inst: Instance, mats: TravelMatrices,
                      p: GAParams, rng: np.random.Generator) -> tuple[int, ...]:
    """OX crossover + swap mutation + light 2-opt clean-up, with elitism."""
    n = inst.n
    customers = list(range(1, n + 1))

    def fitness(perm):
        return tour_length([0] + perm + [0], mats.d)

    pop = []
    for _ in range(p.pop_size):
        perm = list(rng.permutation(customers))
        pop.append([int(c) for c in perm])
    scored = sorted(((fitness(ind), ind) for ind in pop), key=lambda t: (t[0], t[1]))

    def tournament():
        picks = rng.integers(0, p.pop_size, size=3)
        best = min(picks, key=lambda q: scored[int(q)][0])
        return scored[int(best)][1]

    for _ in range(p.generations):
        nxt = [list(ind) for _, ind in scored[:p.elite]]
        while len(nxt) < p.pop_size:
            pa, pb = tournament(), tournament()
            if rng.random() < p.crossover_rate:
                child = ordered_crossover(pa, pb, rng)
            else:
                child = list(pa)
            if rng.random() < p.mutation_rate and n >= 2:
                i, j = rng.integers(0, n, size=2)
                child[int(i)], child[int(j)] = child[int(j)], child[int(i)]
            child = _light_two_opt(child, mats)
            nxt.append(child)
        scored = sorted(((fitness(ind), ind) for ind in nxt), key=lambda t: (t[0], t[1]))

    return (0, *scored[0][1], 0)


# ------------------------------------------------------------------- VNS

def vns(tour: tuple[int, ...], mats: TravelMatrices,
        p: VNSParams, rng: np.random.Generator) -> tuple[int, ...]:
    """Shake with k random moves, descend with local_search, adapt k."""
    d = mats.d
    best = local_search(tour, mats)
    best_len = tour_length(best, d)
    k = 1
    if len(tour) - 2 < 3:
        return best
    for _ in range(p.max_iters):
        cand = list(best)
        for _ in range(k):
            _, cand = _draw_move(cand, d, rng)
        cand = local_search(tuple(cand), mats)
        cand_len = tour_length(cand, d)
        if cand_len < best_len - 1e-12:
            best, best_len = cand, cand_len
            k = 1
        else:
            k = min(k + 1, p.k_max)
    return best
