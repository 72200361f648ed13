"""Route map, timeline, and aggregate bar figures from a bundle."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .bundles import Bundle, BundleError, lane  # noqa: E402

TIMELINE_COLORS = {
    "travel": "#4878cf",
    "wait": "#d65f5f",
    "launch": "#b8b8b8",
    "flight": "#6acc65",
    "recovery": "#b8b8b8",
    "recharge": "#ee854a",
}


def route_figure(bundle: Bundle):
    """Figure + axes for the route map; split out so tests can inspect it."""
    fig, ax = plt.subplots(figsize=(6, 6))
    xs = [c[0] for c in bundle.coordinates]
    ys = [c[1] for c in bundle.coordinates]
    ax.scatter(xs[1:], ys[1:], s=18, color="#444444", zorder=3, label="customer")
    ax.scatter([xs[0]], [ys[0]], s=90, marker="s", color="black", zorder=4,
               label="depot")

    tx = [xs[i] for i in bundle.tour]
    ty = [ys[i] for i in bundle.tour]
    ax.plot(tx, ty, color="#4878cf", lw=1.6, zorder=2, label="truck tour")

    for idx, (u, k, v) in enumerate(bundle.sorties):
        px = [xs[u], xs[k], xs[v]]
        py = [ys[u], ys[k], ys[v]]
        ax.plot(px, py, ls="--", lw=1.1, color="#6acc65", zorder=1, gid="sortie",
                label="drone sortie" if idx == 0 else None)
        ax.scatter([xs[k]], [ys[k]], s=30, marker="^", color="#6acc65", zorder=3)

    ax.set_title(f"{bundle.method} seed {bundle.seed}  "
                 f"makespan {bundle.makespan:.3f}")
    ax.set_aspect("equal")
    ax.legend(loc="upper right", fontsize=8)
    return fig, ax


def plot_route(bundle: Bundle, out_path) -> None:
    fig, _ = route_figure(bundle)
    fig.savefig(out_path, dpi=120, bbox_inches="tight")
    plt.close(fig)


def timeline_figure(bundle: Bundle):
    lanes = {actor: lane(bundle, actor) for actor in ("truck", "drone")}
    fig, ax = plt.subplots(figsize=(8, 2.8))
    ypos = {"truck": 10, "drone": 0}
    seen = set()
    for actor, segs in lanes.items():
        for s in segs:
            color = TIMELINE_COLORS.get(s.kind, "#999999")
            show = s.kind not in seen
            seen.add(s.kind)
            ax.broken_barh([(s.t0, s.t1 - s.t0)], (ypos[actor], 8),
                           facecolors=color, edgecolor="white", linewidth=0.3,
                           label=s.kind if show else None)
    ax.set_yticks([14, 4], labels=["truck", "drone"])
    ax.set_xlim(0, bundle.makespan * 1.02 if bundle.makespan else 1.0)
    ax.set_xlabel("time")
    ax.set_title(f"{bundle.method} seed {bundle.seed}  "
                 f"wait {bundle.total_wait:.3f}")
    ax.legend(loc="upper right", fontsize=7, ncols=3)
    return fig, ax


def plot_timeline(bundle: Bundle, out_path) -> None:
    if not bundle.events:
        raise BundleError("bundle has no event log; cannot draw a timeline")
    fig, _ = timeline_figure(bundle)
    fig.savefig(out_path, dpi=120, bbox_inches="tight")
    plt.close(fig)


def aggregate_figure(bundle: Bundle):
    if not bundle.aggregate:
        raise BundleError("bundle has no aggregate table")
    rows = sorted(bundle.aggregate, key=lambda r: (r["mean"], r["method"]))
    names = [r["method"] for r in rows]
    means = [r["mean"] for r in rows]
    ses = [r.get("se", 0.0) for r in rows]
    fig, ax = plt.subplots(figsize=(1.2 + 0.9 * len(rows), 3.5))
    ax.bar(range(len(rows)), means, yerr=ses, capsize=4, color="#4878cf")
    ax.set_xticks(range(len(rows)), labels=names, rotation=30, ha="right",
                  fontsize=8)
    ax.set_ylabel("makespan (mean $\\pm$ s.e.)")
    lo = min(m - s for m, s in zip(means, ses))
    hi = max(m + s for m, s in zip(means, ses))
    pad = 0.1 * (hi - lo) if hi > lo else 0.1 * hi or 1.0
    ax.set_ylim(max(0.0, lo - pad), hi + pad)
    return fig, ax


def plot_aggregate(bundle: Bundle, out_path) -> None:
    fig, _ = aggregate_figure(bundle)
    fig.savefig(out_path, dpi=120, bbox_inches="tight")
    plt.close(fig)
