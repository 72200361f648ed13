"""Exact truck-drone timeline simulation.

A solution is a truck tour (depot-anchored stop sequence) plus an ordered
list of sorties (u, k, v): launch at stop u, drone serves customer k,
rendezvous at the next stop v. The simulator sweeps the tour edge by edge
keeping two clocks -- the truck's and the drone's ready time -- and
certifies the makespan together with its decomposition into truck travel
and waiting.

Timing rules:
  * launch time L = max(truck clock at u, drone ready time); if the drone
    is still recharging the truck holds at u until L;
  * sortie duration F = tD[u][k] + tD[k][v] + ell + r, must be <= E;
  * rendezvous at Rk = L + F; the truck leaves v at max(arrival, Rk);
  * drone ready time becomes Rk + R (recharge overlaps truck movement).

The drone starts fully charged at the depot, so no recharge gates the
first launch. Makespan is the truck's final depot return (the drone is
always aboard by then since every sortie ends at a tour stop).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import Instance, TravelMatrices

EPS = 1e-9


class FeasibilityError(ValueError):
    """A sortie violates the endurance budget."""


class ValidationError(ValueError):
    """A solution violates the structural constraints."""


@dataclass(frozen=True, order=True)
class Sortie:
    u: int
    k: int
    v: int


@dataclass(frozen=True)
class Solution:
    """Truck tour plus sorties ordered by launch position along the tour."""

    tour: tuple[int, ...]
    sorties: tuple[Sortie, ...] = ()


@dataclass(frozen=True)
class Segment:
    """One timeline interval for plotting: [t0, t1] on an actor's lane."""

    t0: float
    t1: float
    actor: str   # "truck" | "drone"
    kind: str    # truck: travel|wait ; drone: launch|flight|recovery|recharge
    label: str


@dataclass(frozen=True)
class SimReport:
    makespan: float
    truck_travel: float
    total_wait: float
    n_sorties: int
    event_log: tuple[Segment, ...] = ()


def sortie_flight_time(u: int, k: int, v: int, mats: TravelMatrices, inst: Instance) -> float:
    return float(mats.tD[u][k] + mats.tD[k][v]) + inst.ell + inst.r


def sortie_feasible(u: int, k: int, v: int, mats: TravelMatrices, inst: Instance) -> bool:
    return sortie_flight_time(u, k, v, mats, inst) <= inst.E + EPS


def truck_only_makespan(tour: tuple[int, ...], mats: TravelMatrices) -> float:
    return float(sum(mats.tT[tour[i]][tour[i + 1]] for i in range(len(tour) - 1)))


def validate_solution(sol: Solution, inst: Instance) -> list[str]:
    """Structural checks; returns a list of violations (empty means valid)."""
    violations = []
    tour = sol.tour
    if len(tour) < 2 or tour[0] != 0 or tour[-1] != 0:
        violations.append("tour must start and end at depot 0")
        return violations
    interior = tour[1:-1]
    if 0 in interior:
        violations.append("depot appears as an interior stop")
    if len(set(interior)) != len(interior):
        violations.append("tour repeats a customer")
    for c in interior:
        if not (1 <= c <= inst.n):
            violations.append(f"tour stop {c} is not a customer index")

    drone_served = [s.k for s in sol.sorties]
    if len(set(drone_served)) != len(drone_served):
        violations.append("a customer is served by more than one sortie")
    overlap = set(drone_served) & set(interior)
    if overlap:
        violations.append(f"customers served by both truck and drone: {sorted(overlap)}")
    covered = set(drone_served) | set(interior)
    missing = set(range(1, inst.n + 1)) - covered
    if missing:
        violations.append(f"customers never served: {sorted(missing)}")
    extra = set(drone_served) - set(range(1, inst.n + 1))
    if extra:
        violations.append(f"sortie serves non-customer index: {sorted(extra)}")

    edges = {(tour[i], tour[i + 1]): i for i in range(len(tour) - 1)}
    used_edges = set()
    prev_pos = -1
    for s in sol.sorties:
        pos = edges.get((s.u, s.v))
        if pos is None:
            violations.append(f"sortie ({s.u},{s.k},{s.v}): u,v are not consecutive tour stops")
            continue
        if pos in used_edges:
            violations.append(f"edge ({s.u},{s.v}) carries more than one sortie")
        used_edges.add(pos)
        if pos < prev_pos:
            violations.append("sorties are not ordered by launch position")
        prev_pos = pos
    return violations


def _edge_positions(sol: Solution) -> dict[int, Sortie]:
    tour = sol.tour
    edges = {(tour[i], tour[i + 1]): i for i in range(len(tour) - 1)}
    return {edges[(s.u, s.v)]: s for s in sol.sorties}


def simulate(sol: Solution, mats: TravelMatrices, inst: Instance, *, log: bool = False) -> SimReport:
    """Sweep the tour and certify makespan, truck travel and total wait.

    Raises ValidationError on structural violations and FeasibilityError if
    any sortie exceeds the endurance budget. With log=True the report
    carries the full segment log for plotting.
    """
    violations = validate_solution(sol, inst)
    if violations:
        raise ValidationError("; ".join(violations))

    by_edge = _edge_positions(sol)
    tour = sol.tour
    tT, tD = mats.tT, mats.tD

    t = 0.0
    drone_ready = 0.0
    truck_travel = 0.0
    total_wait = 0.0
    segments: list[Segment] = []

    for i in range(len(tour) - 1):
        u, v = tour[i], tour[i + 1]
        sortie = by_edge.get(i)
        if sortie is None:
            leg = float(tT[u][v])
            if log and leg > 0:
                segments.append(Segment(t, t + leg, "truck", "travel", f"{u}->{v}"))
            t += leg
            truck_travel += leg
            continue

        k = sortie.k
        flight = sortie_flight_time(u, k, v, mats, inst)
        if flight > inst.E + EPS:
            raise FeasibilityError(
                f"sortie ({u},{k},{v}) duration {flight:.6f} exceeds endurance {inst.E}"
            )
        launch = max(t, drone_ready)
        hold = launch - t
        if log and hold > 0:
            segments.append(Segment(t, launch, "truck", "wait", f"hold at {u} for recharge"))
        leg = float(tT[u][v])
        arrival = launch + leg
        rendezvous = launch + flight
        if log:
            if leg > 0:
                segments.append(Segment(launch, arrival, "truck", "travel", f"{u}->{v}"))
            segments.append(Segment(launch, launch + inst.ell, "drone", "launch", f"launch at {u}"))
            out_t = float(tD[u][k])
            back_t = float(tD[k][v])
            segments.append(Segment(launch + inst.ell, launch + inst.ell + out_t,
                                    "drone", "flight", f"{u}->{k}"))
            segments.append(Segment(launch + inst.ell + out_t, launch + inst.ell + out_t + back_t,
                                    "drone", "flight", f"{k}->{v}"))
            segments.append(Segment(rendezvous - inst.r, rendezvous, "drone", "recovery",
                                    f"recover at {v}"))
            segments.append(Segment(rendezvous, rendezvous + inst.R, "drone", "recharge",
                                    "recharge"))
        if log and rendezvous > arrival:
            segments.append(Segment(arrival, rendezvous, "truck", "wait", f"wait at {v} for drone"))
        wait = hold + max(0.0, rendezvous - arrival)
        total_wait += wait
        t = max(arrival, rendezvous)
        truck_travel += leg
        drone_ready = rendezvous + inst.R

    return SimReport(
        makespan=t,
        truck_travel=truck_travel,
        total_wait=total_wait,
        n_sorties=len(sol.sorties),
        event_log=tuple(segments),
    )


def check_decomposition(makespan: float, truck_travel: float, total_wait: float,
                        tol: float = EPS) -> bool:
    """Identity makespan = truck_travel + total_wait (truck returns last)."""
    return abs(makespan - (truck_travel + total_wait)) <= tol


def tour_length(tour: tuple[int, ...] | list[int], d: np.ndarray) -> float:
    a = np.asarray(tour)
    return float(d[a[:-1], a[1:]].sum())
