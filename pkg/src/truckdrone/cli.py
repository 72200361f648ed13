"""Command-line entry points: generate / run / batch / train / stats / export-plots."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import click
import numpy as np

from . import harness, policy
from .core import generate_uniform_instance, read_instance, write_instance
from .stats import aggregate_values, wilcoxon_signed_rank


@click.group()
def main():
    """Hybrid truck-drone routing solver and benchmark harness."""


@main.command()
@click.option("--n", type=int, required=True, help="number of customers")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.option("--v-t", "v_T", type=float, default=1.0, show_default=True)
@click.option("--v-d", "v_D", type=float, default=2.0, show_default=True)
@click.option("--endurance", "E", type=float, default=0.7, show_default=True)
@click.option("--recharge", "R", type=float, default=0.1, show_default=True)
@click.option("--launch-time", "ell", type=float, default=0.01, show_default=True)
@click.option("--recovery-time", "r", type=float, default=0.01, show_default=True)
def generate(n, seed, out, v_T, v_D, E, R, ell, r):
    """Generate a uniform unit-square instance and write it to a file."""
    inst = generate_uniform_instance(n, seed, v_T=v_T, v_D=v_D, E=E, R=R, ell=ell, r=r)
    write_instance(inst, out)
    click.echo(f"wrote {n}-customer instance (seed {seed}) to {out}")


@main.command()
@click.option("--instance", "instance_path", type=click.Path(exists=True), required=True)
@click.option("--config", "config_path", type=click.Path(exists=True), required=True,
              help="experiment config; the method is looked up by name")
@click.option("--method", "method_name", required=True)
@click.option("--out", type=click.Path(file_okay=False), default=None)
def run(instance_path, config_path, method_name, out):
    """Run a single method pipeline on one instance file."""
    cfg = harness.ExperimentConfig.from_file(config_path)
    method = next((m for m in cfg.methods if m["name"] == method_name), None)
    if method is None:
        raise click.ClickException(f"method {method_name!r} not in config")
    inst = read_instance(instance_path)
    rec = harness.run_pipeline(method, inst)
    if rec.status != "ok":
        raise click.ClickException(f"pipeline failed at stage {rec.stage}")
    click.echo(f"makespan      {rec.makespan:.6f}")
    click.echo(f"truck travel  {rec.truck_travel:.6f}")
    click.echo(f"wait          {rec.total_wait:.6f}")
    click.echo(f"sorties       {rec.n_sorties}")
    if out:
        harness.emit_results([rec], harness.aggregate([rec]), [], out, cfg.raw)
        click.echo(f"results written to {out}")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), required=True)
@click.option("--out", type=click.Path(file_okay=False), required=True)
@click.option("--jobs", type=int, default=None, help="override config parallelism")
def batch(config_path, out, jobs):
    """Run the full methods x seeds experiment described by a config."""
    cfg = harness.ExperimentConfig.from_file(config_path)
    if jobs is not None:
        cfg = harness.ExperimentConfig(**{**cfg.__dict__, "jobs": jobs})
    records = harness.run_batch(cfg)
    aggs = harness.aggregate(records)
    tests = harness.run_tests(records, cfg.comparisons)
    harness.emit_results(records, aggs, tests, out, cfg.raw)
    n_fail = sum(1 for r in records if r.status != "ok")
    click.echo(f"{len(records)} runs ({n_fail} failed); results in {out}")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), required=True,
              help='config JSON with a "train" section')
@click.option("--out", type=click.Path(dir_okay=False), required=True,
              help="checkpoint path")
def train(config_path, out):
    """Train the scheduling policy with self-critical REINFORCE."""
    with open(config_path) as f:
        doc = json.load(f)
    cfg = policy.TrainConfig(**doc.get("train", {}))
    theta, history = policy.train(cfg)
    policy.save_checkpoint(theta, out, temperature=cfg.temperature)
    last = history[-1] if history else {}
    click.echo(f"trained {cfg.epochs} steps; "
               f"final greedy makespan {last.get('mean_greedy_makespan', float('nan')):.4f}; "
               f"checkpoint at {out}")


@main.command("stats")
@click.option("--runs", "runs_path", type=click.Path(exists=True), required=True)
@click.option("--out", type=click.Path(file_okay=False), required=True)
@click.option("--baseline", default=None,
              help="method compared against every other (default: first in file)")
@click.option("--exact", is_flag=True,
              help="exact Wilcoxon distribution instead of the normal approximation")
def stats_cmd(runs_path, out, baseline, exact):
    """Aggregate a runs CSV and run paired Wilcoxon tests."""
    by_method: dict[str, dict[int, float]] = {}
    order: list[str] = []
    with open(runs_path) as f:
        for row in csv.DictReader(f):
            m = row["method"]
            if m not in by_method:
                by_method[m] = {}
                order.append(m)
            by_method[m][int(row["seed"])] = float(row["makespan"])
    if baseline is None:
        baseline = order[0]
    aggs = [aggregate_values(m, list(by_method[m].values())) for m in order]
    tests = []
    for other in order:
        if other == baseline:
            continue
        seeds = sorted(set(by_method[baseline]) & set(by_method[other]))
        res = wilcoxon_signed_rank([by_method[baseline][s] for s in seeds],
                                   [by_method[other][s] for s in seeds], exact=exact)
        tests.append((baseline, other, res))
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "aggregate.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(harness.AGG_HEADER)
        for a in aggs:
            w.writerow([a.method, repr(a.mean), repr(a.se), a.n_seeds])
    with open(out_dir / "tests.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(harness.TESTS_HEADER)
        for a, b, res in tests:
            w.writerow([a, b, res.n_pairs, repr(res.z), repr(res.p), repr(res.r)])
    click.echo(f"aggregate and tests written to {out}")


@main.command("export-plots")
@click.option("--batch-dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--out", type=click.Path(file_okay=False), required=True)
def export_plots(batch_dir, out):
    """Emit one plot bundle JSON per run from a batch output directory."""
    written = harness.export_plot_bundles(batch_dir, out)
    click.echo(f"wrote {len(written)} plot bundles to {out}")


if __name__ == "__main__":
    main()
