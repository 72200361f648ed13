"""Config-driven experiment runner.

A single JSON config describes the instance distribution, the method
pipelines (constructor -> improver -> local search -> drone scheduler)
and the paired comparisons to test. Every method at a given seed consumes
the same generated instance, and each run draws its randomness from a
SeedSequence of (seed, crc32(method name)), so re-running a config
reproduces every record.
"""

from __future__ import annotations

import csv
import json
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, asdict, field
from pathlib import Path

import numpy as np

from . import alns, construct, metaheuristics, policy, scheduler, stats
from .core import Instance, build_matrices, generate_uniform_instance
from .local_search import local_search
from .simulator import SimReport, Solution, simulate, truck_only_makespan


@dataclass(frozen=True)
class RunRecord:
    method: str
    seed: int
    makespan: float
    truck_travel: float
    total_wait: float
    n_sorties: int
    wall_time: float
    status: str = "ok"            # "ok" | "failed"
    stage: str | None = None      # failing pipeline stage, if any
    solution: Solution | None = None
    report: SimReport | None = None


@dataclass(frozen=True)
class ExperimentConfig:
    n: int
    seeds: tuple[int, ...]
    instance_params: dict
    methods: tuple[dict, ...]
    comparisons: tuple[tuple[str, str], ...]
    jobs: int = 1
    include_timing: bool = True
    raw: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        inst = doc["instances"]
        methods = tuple(doc["methods"])
        names = [m["name"] for m in methods]
        if len(set(names)) != len(names):
            raise ValueError("method names must be unique")
        if not inst["seeds"]:
            raise ValueError("seed list must be non-empty")
        comparisons = doc.get("comparisons")
        if comparisons is None:
            comparisons = [[names[0], other] for other in names[1:]]
        return cls(
            n=int(inst["n"]),
            seeds=tuple(int(s) for s in inst["seeds"]),
            instance_params=dict(inst.get("params", {})),
            methods=methods,
            comparisons=tuple((a, b) for a, b in comparisons),
            jobs=int(doc.get("jobs", 1)),
            include_timing=bool(doc.get("include_timing", True)),
            raw=doc,
        )

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        with open(path) as f:
            return cls.from_dict(json.load(f))


def _method_rng(seed: int, name: str) -> np.random.Generator:
    tag = zlib.crc32(name.encode())
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, tag))))


def _decode_seed(seed: int, name: str) -> int:
    return ((seed & 0x7FFF) << 16) ^ zlib.crc32(name.encode()) & 0x7FFFFFFF


_IMPROVER_PARAMS = {
    "sa": metaheuristics.SAParams,
    "tabu": metaheuristics.TabuParams,
    "ga": metaheuristics.GAParams,
    "vns": metaheuristics.VNSParams,
    "alns": alns.ALNSParams,
}


def _build_tour(method: dict, inst: Instance, mats, rng):
    ctor = {"nn": construct.nearest_neighbor,
            "cw": construct.clarke_wright,
            "sweep": construct.sweep}[method.get("constructor", "nn")]
    return ctor(inst, mats)


def _improve_tour(method: dict, tour, inst, mats, rng):
    name = method.get("improver", "none")
    if name == "none":
        return tour
    params = _IMPROVER_PARAMS[name](**method.get("improver_params", {}))
    if name == "sa":
        return metaheuristics.simulated_annealing(tour, mats, params, rng)
    if name == "tabu":
        return metaheuristics.tabu_search(tour, mats, params, rng)
    if name == "ga":
        return metaheuristics.genetic_algorithm(inst, mats, params, rng)
    if name == "vns":
        return metaheuristics.vns(tour, mats, params, rng)
    return alns.alns_run(tour, mats, params, rng)


def _schedule(method: dict, tour, inst, mats, rng, seed: int) -> Solution:
    kind = method.get("scheduler", "greedy")
    sp = method.get("scheduler_params", {})
    if kind == "none":
        return Solution(tour=tour)
    if kind == "greedy":
        sol = scheduler.greedy_assign(tour, mats, inst)
    elif kind == "beam":
        sol = scheduler.beam_schedule(tour, mats, inst, B=int(sp.get("beam_width", 16)))
    elif kind == "policy":
        if "checkpoint" in sp:
            theta, temperature = policy.load_checkpoint(sp["checkpoint"])
        else:
            theta = np.array([float(sp.get("weights", {}).get(name, 0.0))
                              for name in policy.FEATURE_NAMES])
            temperature = float(sp.get("temperature", 1.0))
        decode = sp.get("decode", "best_of_k")
        if decode == "best_of_k":
            sol = policy.best_of_k_decode(tour, mats, inst, theta,
                                          K=int(sp.get("K", 32)),
                                          seed=_decode_seed(seed, method["name"]),
                                          temperature=temperature)
        elif decode == "beam":
            sol = policy.masked_beam_decode(tour, mats, inst, theta,
                                            B=int(sp.get("beam_width", 16)),
                                            temperature=temperature)
        else:
            sol, _ = policy.rollout(tour, mats, inst, theta, "greedy",
                                    temperature=temperature)
    else:
        raise ValueError(f"unknown scheduler {kind!r}")
    refine = int(method.get("refine_iters", 0))
    if refine > 0:
        sol = scheduler.assignment_vns(sol, mats, inst, iters=refine, rng=rng)
    return sol


def run_pipeline(method: dict, inst: Instance, include_timing: bool = True) -> RunRecord:
    """Construct -> improve -> local search -> schedule -> simulate."""
    rng = _method_rng(inst.seed, method["name"])
    t0 = time.perf_counter()
    stage = "construct"
    try:
        mats = build_matrices(inst)
        tour = _build_tour(method, inst, mats, rng)
        stage = "improve"
        tour = _improve_tour(method, tour, inst, mats, rng)
        stage = "local_search"
        tour = local_search(tour, mats,
                            use_three_opt=bool(method.get("use_three_opt", False)))
        stage = "schedule"
        sol = _schedule(method, tour, inst, mats, rng, inst.seed)
        stage = "simulate"
        report = simulate(sol, mats, inst, log=True)
    except Exception:
        wall = time.perf_counter() - t0 if include_timing else 0.0
        return RunRecord(method["name"], inst.seed, float("nan"), float("nan"),
                         float("nan"), 0, wall, status="failed", stage=stage)
    wall = time.perf_counter() - t0 if include_timing else 0.0
    return RunRecord(method["name"], inst.seed, report.makespan, report.truck_travel,
                     report.total_wait, report.n_sorties, wall,
                     solution=sol, report=report)


def _run_task(args):
    method, n, seed, params, include_timing = args
    inst = generate_uniform_instance(n, seed, **params)
    return run_pipeline(method, inst, include_timing)


def run_batch(cfg: ExperimentConfig) -> list[RunRecord]:
    """Cartesian product of methods x seeds; per-seed instances are shared
    across methods (paired design). Results are ordered (method, seed)
    regardless of the parallelism degree."""
    tasks = [(method, cfg.n, seed, cfg.instance_params, cfg.include_timing)
             for method in cfg.methods for seed in cfg.seeds]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            records = list(pool.map(_run_task, tasks))
    else:
        records = [_run_task(t) for t in tasks]
    return records


def aggregate(records: list[RunRecord]) -> list[stats.AggregateStats]:
    by_method: dict[str, list[float]] = {}
    for rec in records:
        if rec.status != "ok":
            continue
        by_method.setdefault(rec.method, []).append(rec.makespan)
    return [stats.aggregate_values(m, vals) for m, vals in by_method.items()]


def run_tests(records: list[RunRecord],
              comparisons) -> list[tuple[str, str, stats.WilcoxonResult]]:
    by_method: dict[str, dict[int, float]] = {}
    for rec in records:
        if rec.status == "ok":
            by_method.setdefault(rec.method, {})[rec.seed] = rec.makespan
    out = []
    for a, b in comparisons:
        seeds = sorted(set(by_method.get(a, {})) & set(by_method.get(b, {})))
        if len(seeds) < 2:
            continue
        x = [by_method[a][s] for s in seeds]
        y = [by_method[b][s] for s in seeds]
        out.append((a, b, stats.wilcoxon_signed_rank(x, y)))
    return out


def _fmt(x: float) -> str:
    return repr(float(x))


RUNS_HEADER = ["method", "seed", "makespan", "truck_travel", "wait", "n_sorties", "wall_time"]
AGG_HEADER = ["method", "mean", "se", "n_seeds"]
TESTS_HEADER = ["method_a", "method_b", "n_pairs", "z", "p", "r"]


def emit_results(records, aggregates, tests, out_dir, config: dict | None = None) -> None:
    """Write runs/aggregate/tests CSVs plus a provenance bundle JSON."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "runs.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(RUNS_HEADER)
        for r in records:
            if r.status != "ok":
                continue
            w.writerow([r.method, r.seed, _fmt(r.makespan), _fmt(r.truck_travel),
                        _fmt(r.total_wait), r.n_sorties, _fmt(r.wall_time)])
    with open(out / "aggregate.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(AGG_HEADER)
        for a in aggregates:
            w.writerow([a.method, _fmt(a.mean), _fmt(a.se), a.n_seeds])
    with open(out / "tests.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(TESTS_HEADER)
        for a, b, res in tests:
            w.writerow([a, b, res.n_pairs, _fmt(res.z), _fmt(res.p), _fmt(res.r)])
    bundle = {
        "config": config or {},
        "records": [
            {"method": r.method, "seed": r.seed, "status": r.status, "stage": r.stage,
             "makespan": r.makespan, "truck_travel": r.truck_travel,
             "total_wait": r.total_wait, "n_sorties": r.n_sorties,
             "wall_time": r.wall_time,
             "solution": None if r.solution is None else {
                 "tour": list(r.solution.tour),
                 "sorties": [[s.u, s.k, s.v] for s in r.solution.sorties]},
             "events": None if r.report is None else [
                 {"t0": seg.t0, "t1": seg.t1, "actor": seg.actor,
                  "kind": seg.kind, "label": seg.label}
                 for seg in r.report.event_log]}
            for r in records
        ],
        "failures": [{"method": r.method, "seed": r.seed, "stage": r.stage}
                     for r in records if r.status != "ok"],
    }
    with open(out / "bundle.json", "w") as f:
        json.dump(bundle, f, indent=1)
        f.write("\n")


def export_plot_bundles(batch_dir, out_dir, cfg: ExperimentConfig | None = None) -> list[Path]:
    """Split a batch bundle into one plot bundle per run for the plotting
    component: instance coordinates, solution, event log, aggregate table."""
    batch = Path(batch_dir)
    with open(batch / "bundle.json") as f:
        bundle = json.load(f)
    config = bundle.get("config", {})
    inst_cfg = config.get("instances", {})
    aggregates = []
    with open(batch / "aggregate.csv") as f:
        for row in csv.DictReader(f):
            aggregates.append({"method": row["method"], "mean": float(row["mean"]),
                               "se": float(row["se"]), "n_seeds": int(row["n_seeds"])})
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for rec in bundle["records"]:
        if rec["status"] != "ok":
            continue
        inst = generate_uniform_instance(inst_cfg["n"], rec["seed"],
                                         **inst_cfg.get("params", {}))
        doc = {
            "method": rec["method"],
            "seed": rec["seed"],
            "coordinates": [[p.x, p.y] for p in inst.nodes],
            "params": {"v_T": inst.v_T, "v_D": inst.v_D, "E": inst.E,
                       "R": inst.R, "ell": inst.ell, "r": inst.r},
            "solution": rec["solution"],
            "events": rec["events"],
            "makespan": rec["makespan"],
            "truck_travel": rec["truck_travel"],
            "total_wait": rec["total_wait"],
            "n_sorties": rec["n_sorties"],
            "aggregate": aggregates,
        }
        safe = rec["method"].replace("/", "_").replace(" ", "_")
        path = out / f"{safe}__seed{rec['seed']}.json"
        with open(path, "w") as f:
            json.dump(doc, f, indent=1)
            f.write("\n")
        written.append(path)
    return written
