"""Loading and validation of solver result bundles.

A bundle is one JSON document per run, exported by the solver harness:
node coordinates, the final solution (tour + sorties), the event log of
the simulated timeline, headline numbers, and the cross-method aggregate
table. Figures are drawn purely from these files; nothing is recomputed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass


class BundleError(ValueError):
    """Malformed or internally inconsistent bundle document."""


@dataclass(frozen=True)
class Segment:
    t0: float
    t1: float
    actor: str          # "truck" | "drone"
    kind: str           # travel / wait / launch / flight / recovery / recharge
    label: str


@dataclass(frozen=True)
class Bundle:
    method: str
    seed: int
    coordinates: list[tuple[float, float]]
    tour: list[int]
    sorties: list[tuple[int, int, int]]
    events: list[Segment]
    makespan: float
    truck_travel: float
    total_wait: float
    n_sorties: int
    params: dict
    aggregate: list[dict]


def _require(doc: dict, key: str):
    if key not in doc:
        raise BundleError(f"bundle is missing {key!r}")
    return doc[key]


def load_bundle(path) -> Bundle:
    try:
        with open(path) as f:
            doc = json.load(f)
    except json.JSONDecodeError as exc:
        raise BundleError(f"{path}: not valid JSON ({exc})") from exc

    coords = [(float(x), float(y)) for x, y in _require(doc, "coordinates")]
    sol = _require(doc, "solution")
    tour = [int(i) for i in sol["tour"]]
    sorties = [tuple(int(i) for i in s) for s in sol.get("sorties", [])]

    n = len(coords)
    for i in tour:
        if not 0 <= i < n:
            raise BundleError(f"tour references node {i} but only {n} coordinates exist")
    for u, k, v in sorties:
        for i in (u, k, v):
            if not 0 <= i < n:
                raise BundleError(f"sortie ({u},{k},{v}) references node {i} "
                                  f"but only {n} coordinates exist")

    events = []
    for e in doc.get("events") or []:
        seg = Segment(float(e["t0"]), float(e["t1"]), e["actor"], e["kind"],
                      e.get("label", ""))
        if seg.t1 < seg.t0:
            raise BundleError(f"event {seg.label!r} runs backwards "
                              f"({seg.t0} -> {seg.t1})")
        events.append(seg)

    return Bundle(
        method=str(_require(doc, "method")),
        seed=int(_require(doc, "seed")),
        coordinates=coords,
        tour=tour,
        sorties=sorties,
        events=events,
        makespan=float(_require(doc, "makespan")),
        truck_travel=float(doc.get("truck_travel", 0.0)),
        total_wait=float(doc.get("total_wait", 0.0)),
        n_sorties=int(doc.get("n_sorties", len(sorties))),
        params=dict(doc.get("params", {})),
        aggregate=list(doc.get("aggregate", [])),
    )


def lane(bundle: Bundle, actor: str) -> list[Segment]:
    """Segments of one actor sorted by start time; rejects overlaps."""
    segs = sorted((s for s in bundle.events if s.actor == actor),
                  key=lambda s: (s.t0, s.t1))
    for a, b in zip(segs, segs[1:]):
        if b.t0 < a.t1 - 1e-9:
            raise BundleError(f"{actor} lane has overlapping segments: "
                              f"{a.label!r} ends {a.t1}, {b.label!r} starts {b.t0}")
    return segs
