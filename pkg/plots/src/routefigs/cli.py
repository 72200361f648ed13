"""Command line front-end: bundle JSON in, image files out."""

from __future__ import annotations

from pathlib import Path

import click

from .bundles import load_bundle
from .figures import plot_aggregate, plot_route, plot_timeline

KINDS = {
    "route": (plot_route, "route"),
    "timeline": (plot_timeline, "timeline"),
    "aggregate": (plot_aggregate, "aggregate"),
}


@click.command()
@click.option("--bundle", "bundle_path", type=click.Path(exists=True, dir_okay=False),
              required=True, help="run bundle JSON from the solver harness")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True)
@click.option("--kind", type=click.Choice([*KINDS, "all"]), default="all",
              show_default=True)
@click.option("--format", "fmt", type=click.Choice(["png", "svg", "pdf"]),
              default="png", show_default=True)
def main(bundle_path, out_dir, kind, fmt):
    """Render route / timeline / aggregate figures from one result bundle."""
    bundle = load_bundle(bundle_path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = Path(bundle_path).stem
    kinds = list(KINDS) if kind == "all" else [kind]
    for k in kinds:
        fn, suffix = KINDS[k]
        path = out / f"{stem}_{suffix}.{fmt}"
        fn(bundle, path)
        click.echo(f"wrote {path}")


if __name__ == "__main__":
    main()
