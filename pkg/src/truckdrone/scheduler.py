"""Drone sortie scheduling for a fixed truck tour.

All schedulers sweep the tour edge by edge. At the stop u with remaining
stop sequence (w, ...), a candidate sortie serves any still-unassigned
customer k from the remaining sequence: k leaves the truck tour, so the
truck edge becomes (u, w) for downstream k, or (u, next-after-w) when
k == w. Partial schedules are scored by the exact timeline recurrence
(prefix) plus truck-only completion of the remainder, and every complete
solution is certified by the simulator.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .core import Instance, TravelMatrices
from .simulator import (Solution, Sortie, simulate, sortie_feasible,
                        sortie_flight_time, truck_only_makespan, validate_solution)


@dataclass(frozen=True)
class ScheduleState:
    """A partial schedule: truck at `stop`, `remaining` stops still ahead."""

    stop: int
    remaining: tuple[int, ...]          # ends with the depot
    sorties: tuple[Sortie, ...]
    truck_clock: float
    drone_ready: float
    drone_served: frozenset[int]
    visited_edges: int = 0

    @property
    def done(self) -> bool:
        return not self.remaining


def initial_state(tour: tuple[int, ...]) -> ScheduleState:
    return ScheduleState(stop=tour[0], remaining=tuple(tour[1:]), sorties=(),
                         truck_clock=0.0, drone_ready=0.0, drone_served=frozenset())


def candidate_sorties(tour: tuple[int, ...], position: int, unassigned: set[int],
                      mats: TravelMatrices, inst: Instance) -> list[Sortie]:
    """Feasible (u, k, v) triplets for the edge starting at tour[position].

    The rendezvous stop is taken on the tour *after* removing k, so serving
    the immediate next stop reroutes the truck to the stop after it.
    """
    u = tour[position]
    remaining = tour[position + 1:]
    out = []
    for idx, k in enumerate(remaining[:-1]):        # last entry is the depot
        if k not in unassigned:
            continue
        v = remaining[1] if idx == 0 else remaining[0]
        if len(remaining) >= 2 and sortie_feasible(u, k, v, mats, inst):
            out.append(Sortie(u, k, v))
    out.sort()
    return out


def _advance_noop(state: ScheduleState, mats: TravelMatrices) -> ScheduleState:
    w = state.remaining[0]
    return replace(state,
                   stop=w,
                   remaining=state.remaining[1:],
                   truck_clock=state.truck_clock + float(mats.tT[state.stop][w]),
                   visited_edges=state.visited_edges + 1)


def _advance_sortie(state: ScheduleState, k: int, mats: TravelMatrices,
                    inst: Instance) -> ScheduleState:
    u = state.stop
    rem = list(state.remaining)
    rem.remove(k)
    v = rem[0]
    flight = sortie_flight_time(u, k, v, mats, inst)
    launch = max(state.truck_clock, state.drone_ready)
    arrival = launch + float(mats.tT[u][v])
    rendezvous = launch + flight
    return ScheduleState(stop=v,
                         remaining=tuple(rem[1:]),
                         sorties=state.sorties + (Sortie(u, k, v),),
                         truck_clock=max(arrival, rendezvous),
                         drone_ready=rendezvous + inst.R,
                         drone_served=state.drone_served | {k},
                         visited_edges=state.visited_edges + 1)


def _expansions(state: ScheduleState, mats: TravelMatrices,
                inst: Instance) -> list[ScheduleState]:
    """No-op first, then candidate sorties in lexicographic order."""
    out = [_advance_noop(state, mats)]
    u = state.stop
    rem = state.remaining
    for idx, k in enumerate(rem[:-1]):
        v = rem[1] if idx == 0 else rem[0]
        if sortie_feasible(u, k, v, mats, inst):
            out.append(_advance_sortie(state, k, mats, inst))
    return out


def _completion_bound(state: ScheduleState, mats: TravelMatrices) -> float:
    """Exact prefix clock plus truck-only travel over the remaining stops."""
    if state.done:
        return state.truck_clock
    t = state.truck_clock + float(mats.tT[state.stop][state.remaining[0]])
    for a, b in zip(state.remaining[:-1], state.remaining[1:]):
        t += float(mats.tT[a][b])
    return t


def _solution_of(tour: tuple[int, ...], state: ScheduleState) -> Solution:
    reduced = tuple(c for c in tour if c == 0 or c not in state.drone_served)
    return Solution(tour=reduced, sorties=state.sorties)


def _ordered_sorties(tour: tuple[int, ...], sorties) -> tuple[Sortie, ...]:
    pos = {(tour[i], tour[i + 1]): i for i in range(len(tour) - 1)}
    return tuple(sorted(sorties, key=lambda s: pos[(s.u, s.v)]))


def greedy_assign(tour: tuple[int, ...], mats: TravelMatrices, inst: Instance,
                  fixed: tuple[Sortie, ...] = ()) -> Solution:
    """Edge sweep accepting, per edge, the sortie with the largest makespan
    reduction over the current working solution (if any reduction exists).

    `fixed` sorties (whose customers are already off the tour, and whose
    launch/rendezvous stops are consecutive in it) are kept committed; the
    sweep only adds sorties on free edges and never touches a stop that a
    fixed sortie launches from or rendezvouses at.
    """
    cur_tour = list(tour)
    sorties: list[Sortie] = list(fixed)
    fixed_edges = {(s.u, s.v) for s in fixed}
    protected = {s.u for s in fixed} | {s.v for s in fixed}
    pos = 0
    while pos < len(cur_tour) - 1:
        edge = (cur_tour[pos], cur_tour[pos + 1])
        if edge in fixed_edges:
            pos += 1
            continue
        working = Solution(tuple(cur_tour), _ordered_sorties(tuple(cur_tour), sorties))
        base = simulate(working, mats, inst).makespan
        unassigned = set(cur_tour[pos + 1:-1]) - protected
        best = None
        for s in candidate_sorties(tuple(cur_tour), pos, unassigned, mats, inst):
            trial_tour = tuple(c for c in cur_tour if c != s.k)
            trial = Solution(trial_tour, _ordered_sorties(trial_tour, sorties + [s]))
            mk = simulate(trial, mats, inst).makespan
            reduction = base - mk
            key = (-reduction, s.u, s.k, s.v)
            if reduction > 1e-12 and (best is None or key < best[0]):
                best = (key, s)
        if best is not None:
            s = best[1]
            cur_tour.remove(s.k)
            sorties.append(s)
        pos += 1
    final_tour = tuple(cur_tour)
    sol = Solution(final_tour, _ordered_sorties(final_tour, sorties))
    assert not validate_solution(sol, inst)
    return sol


def beam_schedule(tour: tuple[int, ...], mats: TravelMatrices, inst: Instance,
                  B: int = 16) -> Solution:
    """Beam search over edge-by-edge sortie decisions, width B.

    States are ranked by exact prefix time plus truck-only completion;
    ties prefer fewer sorties, then the lexicographically smallest sortie
    list. With B large enough the search is exhaustive.
    """
    if B < 1:
        raise ValueError("beam width must be >= 1")
    frontier = [initial_state(tour)]
    completed: list[ScheduleState] = []
    while frontier:
        nxt: list[ScheduleState] = []
        for state in frontier:
            for child in _expansions(state, mats, inst):
                (completed if child.done else nxt).append(child)
        nxt.sort(key=lambda s: (_completion_bound(s, mats), len(s.sorties), s.sorties))
        frontier = nxt[:B]
    completed.sort(key=lambda s: (s.truck_clock, len(s.sorties), s.sorties))
    best = completed[0]
    sol = _solution_of(tour, best)
    assert not validate_solution(sol, inst)
    return sol


def assignment_vns(sol: Solution, mats: TravelMatrices, inst: Instance,
                   iters: int = 50, rng: np.random.Generator | None = None) -> Solution:
    """Shake the sortie set and re-run the greedy sweep; keep improvements.

    Removes j sorties (j cycles 1..#sorties), reinserts their customers at
    their cheapest tour positions, reschedules greedily, and accepts only
    strictly better makespans; never returns a worse solution.
    """
    if rng is None:
        rng = np.random.Generator(np.random.PCG64(0))
    best = sol
    best_mk = simulate(best, mats, inst).makespan
    j = 1
    for _ in range(iters):
        if not best.sorties:
            break
        j_eff = min(j, len(best.sorties))
        picks = rng.choice(len(best.sorties), size=j_eff, replace=False)
        dropped = {best.sorties[int(i)].k for i in picks}
        kept = tuple(s for s in best.sorties if s.k not in dropped)
        kept_edges = {(s.u, s.v) for s in kept}
        tour = list(best.tour)
        d = mats.d
        for k in sorted(dropped):
            # cheapest insertion that does not split a kept sortie's edge
            slots = [p for p in range(1, len(tour))
                     if (tour[p - 1], tour[p]) not in kept_edges]
            if not slots:
                slots = list(range(1, len(tour)))
            pos = min(slots, key=lambda p: (d[tour[p - 1]][k] + d[k][tour[p]]
                                            - d[tour[p - 1]][tour[p]], p))
            tour.insert(pos, k)
        # a kept sortie can lose its edge only via the no-slot fallback;
        # demote any such sortie's customer back into the tour
        edges_now = {(tour[i], tour[i + 1]) for i in range(len(tour) - 1)}
        broken = [s for s in kept if (s.u, s.v) not in edges_now]
        for s in broken:
            kept = tuple(x for x in kept if x != s)
            tour.insert(len(tour) - 1, s.k)
        cand = greedy_assign(tuple(tour), mats, inst, fixed=kept)
        mk = simulate(cand, mats, inst).makespan
        if mk < best_mk - 1e-12:
            best, best_mk = cand, mk
            j = 1
        else:
            j = min(j + 1, max(1, len(best.sorties)))
    return best
