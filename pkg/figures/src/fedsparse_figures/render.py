"""Render fedsparse CSV artifacts to PNG+SVG figures.

Two figure kinds:
  pareto       -- one pareto.csv (method,fraction,seed,final_accuracy,total_energy):
                  accuracy vs total energy, one series per method, points
                  annotated with the sparsity fraction. Mean rows (seed ==
                  "mean"), when present, form the primary series and the
                  per-seed points are drawn faint behind them.
  convergence  -- one or more per-round metrics CSVs
                  (round,accuracy,loss,payload,round_energy,cumulative_energy):
                  accuracy vs round, one curve per file.

Inputs are read-only; outputs are written next to the requested path with
.png and .svg extensions.
"""

from __future__ import annotations

import argparse
import csv
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

# Okabe-Ito colorblind-safe cycle
PALETTE = ["#0072B2", "#D55E00", "#009E73", "#CC79A7", "#E69F00", "#56B4E9", "#000000"]

PARETO_COLUMNS = ["method", "fraction", "seed", "final_accuracy", "total_energy"]
CONVERGENCE_COLUMNS = ["round", "accuracy"]


class SchemaError(ValueError):
    """Input CSV does not match the documented schema."""


@dataclass
class FigureSpec:
    inputs: list[Path]
    output: Path
    kind: str  # "pareto" | "convergence"
    xlabel: str | None = None
    ylabel: str | None = None
    method_names: dict[str, str] = field(default_factory=dict)


def read_rows(path, required: list[str]) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [col for col in required if col not in header]
        if missing:
            raise SchemaError(f"{path}: missing column(s): {', '.join(missing)}")
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return rows


def save_figure(fig, output) -> list[Path]:
    base = Path(output)
    if base.suffix in (".png", ".svg"):
        base = base.with_suffix("")
    base.parent.mkdir(parents=True, exist_ok=True)
    paths = [base.with_suffix(".png"), base.with_suffix(".svg")]
    for path in paths:
        fig.savefig(path, bbox_inches="tight", dpi=150)
    return paths


def plot_pareto(rows: list[dict], ax, method_names: dict[str, str] | None = None) -> dict:
    """One (energy, accuracy) series per method; returns {method: point count}."""
    method_names = method_names or {}
    methods = list(dict.fromkeys(row["method"] for row in rows))
    series = {}
    for i, method in enumerate(methods):
        color = PALETTE[i % len(PALETTE)]
        mine = [r for r in rows if r["method"] == method]
        means = [r for r in mine if r["seed"] == "mean"]
        seeds = [r for r in mine if r["seed"] != "mean"]
        primary = means if means else seeds
        primary = sorted(primary, key=lambda r: float(r["total_energy"]))
        xs = [float(r["total_energy"]) for r in primary]
        ys = [float(r["final_accuracy"]) for r in primary]
        ax.plot(xs, ys, "o-", color=color, label=method_names.get(method, method))
        for r, x, y in zip(primary, xs, ys):
            ax.annotate(f'{float(r["fraction"]):g}', (x, y),
                        textcoords="offset points", xytext=(4, 4), fontsize=8)
        if means and seeds:
            ax.plot(
                [float(r["total_energy"]) for r in seeds],
                [float(r["final_accuracy"]) for r in seeds],
                "o", color=color, alpha=0.3, markersize=3, zorder=1,
            )
        series[method] = len(primary)
    ax.legend()
    return series


def plot_convergence(curves: list[tuple[str, list[dict]]], ax,
                     method_names: dict[str, str] | None = None) -> dict:
    """Accuracy-vs-round curve per input; returns {label: round count}."""
    method_names = method_names or {}
    lengths = {label: len(rows) for label, rows in curves}
    if len(set(lengths.values())) > 1:
        warnings.warn(f"round counts differ across inputs: {lengths}", stacklevel=2)
    series = {}
    for i, (label, rows) in enumerate(curves):
        xs = [int(r["round"]) for r in rows]
        ys = [float(r["accuracy"]) for r in rows]
        ax.plot(xs, ys, color=PALETTE[i % len(PALETTE)], label=method_names.get(label, label))
        series[label] = len(xs)
    ax.legend()
    return series


def render(spec: FigureSpec) -> list[Path]:
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    try:
        if spec.kind == "pareto":
            if len(spec.inputs) != 1:
                raise SchemaError("pareto figures take exactly one input CSV")
            rows = read_rows(spec.inputs[0], PARETO_COLUMNS)
            plot_pareto(rows, ax, spec.method_names)
            ax.set_xlabel(spec.xlabel or "total energy (cost units)")
            ax.set_ylabel(spec.ylabel or "final accuracy")
            ax.set_title("Performance vs energy")
        elif spec.kind == "convergence":
            curves = [(path.stem, read_rows(path, CONVERGENCE_COLUMNS))
                      for path in spec.inputs]
            plot_convergence(curves, ax, spec.method_names)
            ax.set_xlabel(spec.xlabel or "round")
            ax.set_ylabel(spec.ylabel or "accuracy")
            ax.set_title("Convergence")
        else:
            raise SchemaError(f"unknown figure kind {spec.kind!r}")
        ax.grid(True, alpha=0.3)
        return save_figure(fig, spec.output)
    finally:
        plt.close(fig)


def parse_method_names(raw: str | None) -> dict[str, str]:
    out = {}
    for pair in (raw or "").split(","):
        if pair.strip():
            key, _, value = pair.partition("=")
            out[key.strip()] = value.strip() or key.strip()
    return out


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fedsparse-figures", description="Render fedsparse CSVs to PNG+SVG figures."
    )
    parser.add_argument("--kind", required=True, choices=["pareto", "convergence"])
    parser.add_argument("--input", required=True, nargs="+", help="input CSV file(s)")
    parser.add_argument("--output", required=True, help="output path (.png/.svg written)")
    parser.add_argument("--xlabel")
    parser.add_argument("--ylabel")
    parser.add_argument("--method-names", help="rename series, e.g. topk=Top-K,cwmp=CWMP")
    args = parser.parse_args(argv)
    spec = FigureSpec(
        inputs=[Path(p) for p in args.input],
        output=Path(args.output),
        kind=args.kind,
        xlabel=args.xlabel,
        ylabel=args.ylabel,
        method_names=parse_method_names(args.method_names),
    )
    try:
        for path in render(spec):
            print(f"wrote {path}")
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
