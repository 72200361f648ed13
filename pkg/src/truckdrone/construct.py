"""Constructive truck-tour heuristics: nearest neighbor, Clarke-Wright, sweep.

All constructors are deterministic: every tie is broken by customer index
(or lexicographic pair), so golden tests stay stable.
"""

from __future__ import annotations

import math

from .core import Instance, TravelMatrices


def nearest_neighbor(inst: Instance, mats: TravelMatrices) -> tuple[int, ...]:
    """Repeatedly visit the closest unserved customer, ties by lowest index."""
    d = mats.d
    unvisited = set(range(1, inst.n + 1))
    tour = [0]
    cur = 0
    while unvisited:
        nxt = min(unvisited, key=lambda j: (d[cur][j], j))
        tour.append(nxt)
        unvisited.remove(nxt)
        cur = nxt
    tour.append(0)
    return tuple(tour)


def clarke_wright(inst: Instance, mats: TravelMatrices) -> tuple[int, ...]:
    """Uncapacitated savings merge: s(i,j) = d0i + d0j - dij, descending.

    Each customer starts on its own depot round trip; routes merge at
    endpoints. There is no truck capacity in this problem, so merging
    continues (with a final cleanup pass over remaining endpoint pairs)
    until a single tour covers everyone.
    """
    d = mats.d
    n = inst.n
    if n == 1:
        return (0, 1, 0)

    savings = []
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            savings.append((d[0][i] + d[0][j] - d[i][j], i, j))
    # descending saving, ties by (i, j) lexicographic
    savings.sort(key=lambda s: (-s[0], s[1], s[2]))

    route_of = {i: i for i in range(1, n + 1)}   # customer -> route id
    routes = {i: [i] for i in range(1, n + 1)}

    def try_merge(i: int, j: int) -> bool:
        ri, rj = route_of[i], route_of[j]
        if ri == rj:
            return False
        a, b = routes[ri], routes[rj]
        if i not in (a[0], a[-1]) or j not in (b[0], b[-1]):
            return False
        if a[-1] != i:
            a.reverse()
        if b[0] != j:
            b.reverse()
        a.extend(b)
        for c in b:
            route_of[c] = ri
        del routes[rj]
        return True

    for _, i, j in savings:
        try_merge(i, j)

    # cleanup: a single descending pass can leave several routes when a
    # pair was scanned while one of its nodes was still interior
    while len(routes) > 1:
        best = None
        for _, i, j in savings:
            ri, rj = route_of[i], route_of[j]
            if ri == rj:
                continue
            a, b = routes[ri], routes[rj]
            if i in (a[0], a[-1]) and j in (b[0], b[-1]):
                best = (i, j)
                break
        assert best is not None
        try_merge(*best)

    (route,) = routes.values()
    return (0, *route, 0)


def sweep(inst: Instance, mats: TravelMatrices) -> tuple[int, ...]:
    """Visit customers by polar angle around the depot.

    Angles are measured from the positive x-axis, normalized to [0, 2*pi);
    ties broken by radius then index. A customer coincident with the depot
    gets angle 0.
    """
    depot = inst.nodes[0]

    def key(i: int):
        p = inst.nodes[i]
        dx, dy = p.x - depot.x, p.y - depot.y
        radius = math.hypot(dx, dy)
        angle = math.atan2(dy, dx) % (2 * math.pi) if radius > 0 else 0.0
        return (angle, radius, i)

    order = sorted(range(1, inst.n + 1), key=key)
    return (0, *order, 0)
