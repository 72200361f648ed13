"""Geometry, instances, travel-time matrices, generation and file I/O.

Node 0 is always the depot. Coordinates live in the unit square for
generated instances; travel times are Euclidean distance divided by the
vehicle speed. Instance generation uses numpy's PCG64 generator so the
same (n, seed, params) always yields the same instance on any platform.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


class ConfigurationError(ValueError):
    """Invalid operational parameters (speeds, endurance, handling)."""


class SchemaError(ValueError):
    """Instance/solution file is structurally valid but missing or mistyping a field."""


class ParseError(ValueError):
    """Instance/solution file is not well-formed; carries a line number when known."""


@dataclass(frozen=True)
class Point:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ConfigurationError(f"non-finite coordinate ({self.x}, {self.y})")


def euclidean_distance(a: Point, b: Point) -> float:
    return math.hypot(a.x - b.x, a.y - b.y)


@dataclass(frozen=True)
class Instance:
    """A routing instance: depot + customers plus operational parameters.

    nodes[0] is the depot. v_T/v_D are truck/drone speeds, E the drone
    endurance budget per sortie, R the mandatory post-sortie recharge,
    ell/r the launch and recovery handling times. seed records how the
    instance was generated (-1 for hand-built instances).
    """

    nodes: tuple[Point, ...]
    v_T: float = 1.0
    v_D: float = 2.0
    E: float = 0.7
    R: float = 0.1
    ell: float = 0.01
    r: float = 0.01
    seed: int = -1

    def __post_init__(self):
        if len(self.nodes) < 2:
            raise ConfigurationError("instance needs at least one customer")
        if self.v_T <= 0 or self.v_D <= 0:
            raise ConfigurationError("speeds must be positive")
        if self.E <= 0:
            raise ConfigurationError("endurance must be positive")
        if self.R < 0 or self.ell < 0 or self.r < 0:
            raise ConfigurationError("recharge/handling times must be nonnegative")
        if self.ell + self.r >= self.E:
            raise ConfigurationError(
                f"handling ell+r={self.ell + self.r} >= endurance E={self.E}: "
                "no sortie can ever be feasible"
            )

    @property
    def n(self) -> int:
        """Number of customers (nodes minus the depot)."""
        return len(self.nodes) - 1

    @property
    def customers(self) -> range:
        return range(1, len(self.nodes))


@dataclass(frozen=True)
class TravelMatrices:
    """Distance and travel-time matrices over all nodes of an instance."""

    d: np.ndarray
    tT: np.ndarray
    tD: np.ndarray


def build_matrices(inst: Instance) -> TravelMatrices:
    """Euclidean distances and per-vehicle travel times for every node pair."""
    xy = np.array([(p.x, p.y) for p in inst.nodes])
    diff = xy[:, None, :] - xy[None, :, :]
    d = np.sqrt((diff ** 2).sum(axis=2))
    mats = TravelMatrices(d=d, tT=d / inst.v_T, tD=d / inst.v_D)
    for m in (mats.d, mats.tT, mats.tD):
        m.setflags(write=False)
    return mats


def generate_uniform_instance(n: int, seed: int, *, v_T: float = 1.0, v_D: float = 2.0,
                              E: float = 0.7, R: float = 0.1,
                              ell: float = 0.01, r: float = 0.01) -> Instance:
    """Depot at the origin, n customers i.i.d. uniform on the unit square.

    Deterministic for a fixed (n, seed): coordinates come from PCG64(seed).
    """
    if n < 1:
        raise ConfigurationError("n must be >= 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    coords = rng.random((n, 2))
    nodes = (Point(0.0, 0.0),) + tuple(Point(float(x), float(y)) for x, y in coords)
    return Instance(nodes=nodes, v_T=v_T, v_D=v_D, E=E, R=R, ell=ell, r=r, seed=seed)


_INSTANCE_FIELDS = ("n", "depot", "customers", "v_T", "v_D", "E", "R", "ell", "r", "seed")


def write_instance(inst: Instance, path) -> None:
    """One instance per JSON file; see docs/file-formats.md for the schema."""
    doc = {
        "n": inst.n,
        "depot": [inst.nodes[0].x, inst.nodes[0].y],
        "customers": [[p.x, p.y] for p in inst.nodes[1:]],
        "v_T": inst.v_T,
        "v_D": inst.v_D,
        "E": inst.E,
        "R": inst.R,
        "ell": inst.ell,
        "r": inst.r,
        "seed": inst.seed,
    }
    with open(path, "w") as f:
        json.dump(doc, f, indent=2)
        f.write("\n")


def read_instance(path) -> Instance:
    with open(path) as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as e:
            raise ParseError(f"{path}: line {e.lineno}: {e.msg}") from e
    if not isinstance(doc, dict):
        raise SchemaError(f"{path}: expected a JSON object at top level")
    for key in _INSTANCE_FIELDS:
        if key not in doc:
            raise SchemaError(f"{path}: missing field {key!r}")
    customers = doc["customers"]
    if len(customers) != doc["n"]:
        raise SchemaError(f"{path}: n={doc['n']} but {len(customers)} customer rows")
    try:
        nodes = (Point(float(doc["depot"][0]), float(doc["depot"][1])),) + tuple(
            Point(float(x), float(y)) for x, y in customers
        )
    except (TypeError, ValueError, IndexError) as e:
        raise SchemaError(f"{path}: malformed coordinate entry: {e}") from e
    return Instance(
        nodes=nodes,
        v_T=float(doc["v_T"]), v_D=float(doc["v_D"]),
        E=float(doc["E"]), R=float(doc["R"]),
        ell=float(doc["ell"]), r=float(doc["r"]),
        seed=int(doc["seed"]),
    )
