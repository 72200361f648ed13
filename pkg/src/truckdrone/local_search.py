"""Tour improvement: 2-opt, 3-opt, Or-opt and a composite loop.

Every operator uses best-improvement move selection with lexicographic
tie-breaking and a strict improvement threshold of 1e-9, which makes the
fixpoints deterministic and guarantees termination under floating point.
"""

from __future__ import annotations

import numpy as np

from .core import TravelMatrices
from .simulator import tour_length

IMPROVE_EPS = 1e-9


def _best_two_opt_move(a: np.ndarray, d: np.ndarray):
    """Best segment reversal (i, j): reverse a[i..j]. Returns (gain, i, j)."""
    m = len(a) - 2
    if m < 2:
        return 0.0, 0, 0
    idx = np.arange(1, m + 1)
    prev, cur, nxt = a[idx - 1], a[idx], a[idx + 1]
    removed = d[prev, cur][:, None] + d[cur, nxt][None, :]
    added = d[np.ix_(prev, cur)] + d[np.ix_(cur, nxt)]
    gain = removed - added
    rows = np.arange(m)
    gain[rows[:, None] >= rows[None, :]] = -np.inf   # need i < j
    flat = int(np.argmax(gain))
    i, j = divmod(flat, m)
    return float(gain[i, j]), int(idx[i]), int(idx[j])


def two_opt(tour: tuple[int, ...], mats: TravelMatrices) -> tuple[int, ...]:
    """Best-improvement segment reversals to a fixpoint."""
    a = np.array(tour)
    d = mats.d
    while True:
        gain, i, j = _best_two_opt_move(a, d)
        if gain <= IMPROVE_EPS:
            break
        a[i:j + 1] = a[i:j + 1][::-1]
    return tuple(int(x) for x in a)


def or_opt(tour: tuple[int, ...], mats: TravelMatrices) -> tuple[int, ...]:
    """Relocate chains of 1..3 consecutive customers, both orientations."""
    a = list(tour)
    d = mats.d
    while True:
        m = len(a) - 2
        best = (IMPROVE_EPS, None)
        for L in (1, 2, 3):
            if L > m - 0:
                break
            for i in range(1, m - L + 2):
                chain = a[i:i + L]
                removed = d[a[i - 1]][a[i]] + d[a[i + L - 1]][a[i + L]] - d[a[i - 1]][a[i + L]]
                for j in range(0, m + 1):
                    if i - 1 <= j <= i + L - 1:
                        continue
                    base = d[a[j]][a[j + 1]]
                    for orient in (0, 1):
                        first = chain[0] if orient == 0 else chain[-1]
                        last = chain[-1] if orient == 0 else chain[0]
                        added = d[a[j]][first] + d[last][a[j + 1]] - base
                        gain = removed - added
                        if gain > best[0]:
                            best = (gain, (L, i, j, orient))
        if best[1] is None:
            break
        L, i, j, orient = best[1]
        chain = a[i:i + L]
        if orient:
            chain.reverse()
        rest = a[:i] + a[i + L:]
        # j indexed positions of the original list; shift if the chain sat before j
        j_new = j - L if j >= i + L else j
        a = rest[:j_new + 1] + chain + rest[j_new + 1:]
    return tuple(a)


_THREE_OPT_VARIANTS = range(7)


def _three_opt_delta(a, d, p1, p2, p3, variant):
    a1, b1 = a[p1], a[p1 + 1]
    b2, c1 = a[p2], a[p2 + 1]
    c2, d1 = a[p3], a[p3 + 1]
    removed = d[a1][b1] + d[b2][c1] + d[c2][d1]
    if variant == 0:     # reverse B
        added = d[a1][b2] + d[b1][c1] + d[c2][d1]
    elif variant == 1:   # reverse C
        added = d[a1][b1] + d[b2][c2] + d[c1][d1]
    elif variant == 2:   # reverse both
        added = d[a1][b2] + d[b1][c2] + d[c1][d1]
    elif variant == 3:   # C then B
        added = d[a1][c1] + d[c2][b1] + d[b2][d1]
    elif variant == 4:   # C then B reversed
        added = d[a1][c1] + d[c2][b2] + d[b1][d1]
    elif variant == 5:   # C reversed then B
        added = d[a1][c2] + d[c1][b1] + d[b2][d1]
    else:                # C reversed then B reversed
        added = d[a1][c2] + d[c1][b2] + d[b1][d1]
    return removed - added


def _three_opt_apply(a, p1, p2, p3, variant):
    A, B, C, D = a[:p1 + 1], a[p1 + 1:p2 + 1], a[p2 + 1:p3 + 1], a[p3 + 1:]
    if variant == 0:
        return A + B[::-1] + C + D
    if variant == 1:
        return A + B + C[::-1] + D
    if variant == 2:
        return A + B[::-1] + C[::-1] + D
    if variant == 3:
        return A + C + B + D
    if variant == 4:
        return A + C + B[::-1] + D
    if variant == 5:
        return A + C[::-1] + B + D
    return A + C[::-1] + B[::-1] + D


def three_opt(tour: tuple[int, ...], mats: TravelMatrices) -> tuple[int, ...]:
    """Remove three edges, reconnect with the best of the standard variants."""
    a = list(tour)
    d = mats.d
    while True:
        m = len(a) - 2
        best = (IMPROVE_EPS, None)
        for p1 in range(0, m - 1):
            for p2 in range(p1 + 1, m):
                for p3 in range(p2 + 1, m + 1):
                    for variant in _THREE_OPT_VARIANTS:
                        gain = _three_opt_delta(a, d, p1, p2, p3, variant)
                        if gain > best[0]:
                            best = (gain, (p1, p2, p3, variant))
        if best[1] is None:
            break
        a = _three_opt_apply(a, *best[1])
    return tuple(a)


def local_search(tour: tuple[int, ...], mats: TravelMatrices, *,
                 use_three_opt: bool = False) -> tuple[int, ...]:
    """Interleave 2-opt and Or-opt (optionally 3-opt) to a joint fixpoint."""
    cur = tuple(tour)
    while True:
        nxt = two_opt(cur, mats)
        nxt = or_opt(nxt, mats)
        if use_three_opt:
            nxt = three_opt(nxt, mats)
        if nxt == cur:
            return cur
        if tour_length(nxt, mats.d) > tour_length(cur, mats.d) + IMPROVE_EPS:
            return cur   # defensive; operators never worsen
        cur = nxt
