"""SVG line charts rendered from the CSV outputs."""

from __future__ import annotations

import csv
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

# fixed ids and no timestamp so identical CSVs give identical SVGs
matplotlib.rcParams["svg.hashsalt"] = "sinrcs"
_SVG_META = {"Date": None}


def _read(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata=_SVG_META)
    plt.close(fig)


def plot_report(report_csv, goodput_svg, jain_svg) -> None:
    """Aggregate goodput and Jain index against density, one line per mechanism."""
    by_mech = defaultdict(list)
    for row in _read(report_csv):
        by_mech[row["mechanism"]].append(row)
    for column, path, label in (
        ("aggregate_goodput_bps", goodput_svg, "aggregate goodput (Mb/s)"),
        ("jain", jain_svg, "Jain fairness index"),
    ):
        fig, ax = plt.subplots(figsize=(5, 3.5))
        for mech, rows in sorted(by_mech.items()):
            rows = sorted(rows, key=lambda r: float(r["density"]))
            x = [float(r["density"]) for r in rows]
            y = [float(r[column]) for r in rows]
            if column == "aggregate_goodput_bps":
                y = [v / 1e6 for v in y]
            ax.plot(x, y, marker="o", label=mech)
        ax.set_xlabel("node density")
        ax.set_ylabel(label)
        ax.legend(frameon=False)
        _save(fig, path)


def plot_traces(trace_csv, svg, reference: float | None = None) -> None:
    """Per-node threshold against time, with the network mean in bold."""
    series = defaultdict(list)
    for row in _read(trace_csv):
        series[row["node_id"]].append((float(row["time_us"]) / 1e3, float(row["t_cs_watts"])))
    scale = reference or 1.0
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for pts in series.values():
        t, v = zip(*pts)
        ax.step(t, [x / scale for x in v], where="post", color="0.8", lw=0.5)
    if series:
        times = sorted({t for pts in series.values() for t, _ in pts})
        current = {k: pts[0][1] for k, pts in series.items()}
        events = sorted((t, k, v) for k, pts in series.items() for t, v in pts)
        mean, i = [], 0
        for t in times:
            while i < len(events) and events[i][0] <= t:
                current[events[i][1]] = events[i][2]
                i += 1
            mean.append(sum(current.values()) / len(current) / scale)
        ax.step(times, mean, where="post", color="k", lw=1.5, label="mean")
        ax.legend(frameon=False)
    ax.set_yscale("log")
    ax.set_xlabel("time (ms)")
    ax.set_ylabel("t_cs / t*_cs" if reference else "t_cs (W)")
    _save(fig, svg)


def plot_surface(surface_csv, svg, column: str = "goodput_bps") -> None:
    """One curve of ``column`` against t_cs per density."""
    by_density = defaultdict(list)
    for row in _read(surface_csv):
        by_density[float(row["density"])].append((float(row["t_cs"]), float(row[column])))
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for d, pts in sorted(by_density.items()):
        pts.sort()
        ax.plot([p[0] for p in pts], [p[1] for p in pts], marker=".", label=f"density {d:g}")
    ax.set_xscale("log")
    ax.set_xlabel("t_cs (W)")
    ax.set_ylabel(column)
    ax.legend(frameon=False, fontsize="small")
    _save(fig, svg)
