"""Overlay plots of observed mean error against bound curves.

Consumes exactly the CSV schemas budgetlab emits:

* trajectory.csv -- ``t,mean_error,sem,replicates``; drawn as a line with a
  shaded band of +/- 2 standard errors;
* bounds.csv     -- ``t,value,label,kind``; one line per label, negative
  values included as-is (the small-budget approximation is supposed to sink
  below zero and the plot must show it).

Invocation: ``render --spec plot.json``. The spec file lists inputs, labels,
axis scale, title and the output image path (SVG by default, PNG by
extension). Rendering is deterministic: fixed style, salted SVG ids, no
timestamp metadata.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib
import numpy as np

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "budgetlab-figures"

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)


class MalformedCsv(ValueError):
    pass


@dataclass
class Trajectory:
    label: str
    t: np.ndarray
    mean_error: np.ndarray
    sem: np.ndarray
    replicates: int


@dataclass
class BoundLine:
    label: str
    kind: str
    t: np.ndarray
    values: np.ndarray


@dataclass
class PlotSpec:
    output: str
    trajectories: list = field(default_factory=list)  # [{"path":..., "label":...}]
    bounds: list = field(default_factory=list)        # [path, ...]
    scale: str = "linear"
    title: str = ""

    def __post_init__(self):
        if not self.trajectories and not self.bounds:
            raise ValueError("plot spec needs at least one trajectory or bounds input")
        if self.scale not in ("linear", "log"):
            raise ValueError(f"unknown axis scale {self.scale!r}")

    @classmethod
    def from_json(cls, doc: dict) -> "PlotSpec":
        return cls(output=doc["output"],
                   trajectories=list(doc.get("trajectories", [])),
                   bounds=list(doc.get("bounds", [])),
                   scale=doc.get("scale", "linear"),
                   title=doc.get("title", ""))


def _parse_row(path, row_no, row, width):
    if len(row) != width:
        raise MalformedCsv(f"{path}: row {row_no} has {len(row)} fields, "
                           f"expected {width}: {row!r}")
    try:
        return [float(v) for v in row[:width - 1]] + [row[-1]]
    except ValueError as exc:
        raise MalformedCsv(f"{path}: row {row_no}: {exc}") from exc


def load_trajectory_csv(path, label: str = "") -> Trajectory:
    """Parse ``t,mean_error,sem,replicates``; raises MalformedCsv with the
    offending row number."""
    t, mean, sem, reps = [], [], [], 0
    with open(path, newline="") as fh:
        rows = csv.reader(fh)
        header = next(rows, None)
        if header != ["t", "mean_error", "sem", "replicates"]:
            raise MalformedCsv(f"{path}: row 1: bad trajectory header {header!r}")
        for i, row in enumerate(rows, start=2):
            if len(row) != 4:
                raise MalformedCsv(f"{path}: row {i} has {len(row)} fields: {row!r}")
            try:
                t.append(float(row[0]))
                mean.append(float(row[1]))
                sem.append(float(row[2]))
                reps = int(row[3])
            except ValueError as exc:
                raise MalformedCsv(f"{path}: row {i}: {exc}") from exc
    return Trajectory(label or Path(path).stem, np.array(t), np.array(mean),
                      np.array(sem), reps)


def load_bounds_csv(path) -> list[BoundLine]:
    """Parse ``t,value,label,kind`` into one line per label (file order)."""
    series: dict[str, dict] = {}
    with open(path, newline="") as fh:
        rows = csv.reader(fh)
        header = next(rows, None)
        if header != ["t", "value", "label", "kind"]:
            raise MalformedCsv(f"{path}: row 1: bad bounds header {header!r}")
        for i, row in enumerate(rows, start=2):
            if len(row) != 4:
                raise MalformedCsv(f"{path}: row {i} has {len(row)} fields: {row!r}")
            try:
                tv, vv = float(row[0]), float(row[1])
            except ValueError as exc:
                raise MalformedCsv(f"{path}: row {i}: {exc}") from exc
            entry = series.setdefault(row[2], {"kind": row[3], "t": [], "v": []})
            entry["t"].append(tv)
            entry["v"].append(vv)
    return [BoundLine(lbl, e["kind"], np.array(e["t"]), np.array(e["v"]))
            for lbl, e in series.items()]


_BOUND_STYLE = {"upper": "--", "lower": ":", "exact": "-."}


def render_figure(spec: PlotSpec):
    """Build the matplotlib figure; data arrays go in untouched (no clipping,
    no resampling), so negative bound values show as drawn."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2), dpi=120)
    for item in spec.trajectories:
        traj = load_trajectory_csv(item["path"], item.get("label", ""))
        ax.plot(traj.t, traj.mean_error, lw=1.6,
                label=f"{traj.label} (mean of {traj.replicates})")
        ax.fill_between(traj.t, traj.mean_error - 2 * traj.sem,
                        traj.mean_error + 2 * traj.sem, alpha=0.25, lw=0)
    for path in spec.bounds:
        for line in load_bounds_csv(path):
            ax.plot(line.t, line.values,
                    _BOUND_STYLE.get(line.kind, "--"), lw=1.3, label=line.label)
    ax.set_xlabel("generation t")
    ax.set_ylabel("expected approximation error")
    ax.set_yscale(spec.scale)
    if spec.scale == "linear":
        ax.axhline(0.0, color="0.6", lw=0.6)
    if spec.title:
        ax.set_title(spec.title)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    return fig


def render(spec: PlotSpec) -> str:
    """Render and write the image; returns the output path."""
    fig = render_figure(spec)
    out = Path(spec.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, metadata={"Date": None} if out.suffix == ".svg" else None)
    plt.close(fig)
    return str(out)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="render", description="Render budgetlab CSV outputs as overlay plots.")
    ap.add_argument("--spec", required=True, help="plot spec JSON")
    args = ap.parse_args(argv)
    try:
        with open(args.spec) as fh:
            spec = PlotSpec.from_json(json.load(fh))
        out = render(spec)
    except (OSError, KeyError, ValueError, json.JSONDecodeError) as exc:
        print(f"render: {exc}", file=sys.stderr)
        return 1
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
