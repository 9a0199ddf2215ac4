"""CSV artifacts behind the CLI: per-round metrics files and the Pareto sweep.

Schemas (stable, consumed verbatim by the figures scripts):
  metrics CSV: round,accuracy,loss,payload,round_energy,cumulative_energy
  pareto CSV:  method,fraction,seed,final_accuracy,total_energy
               (seed column holds the literal "mean" for per-method mean rows)
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .config import ExperimentPlan
from .data import Dataset
from .federation import FederationConfig, RoundMetrics, run_federation

METRICS_HEADER = ["round", "accuracy", "loss", "payload", "round_energy", "cumulative_energy"]
PARETO_HEADER = ["method", "fraction", "seed", "final_accuracy", "total_energy"]


class SweepError(RuntimeError):
    """A sweep entry failed; completed rows were kept."""


@dataclass
class ParetoPoint:
    method: str
    fraction: float
    seed: int
    final_accuracy: float
    total_energy: float


def write_metrics_csv(metrics: list[RoundMetrics], path) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(METRICS_HEADER)
        for m in metrics:
            writer.writerow(
                [m.round, repr(m.accuracy), repr(m.loss), m.payload,
                 repr(m.round_energy), repr(m.cumulative_energy)]
            )
    return path


def run_single(cfg: FederationConfig, train: Dataset, eval_set: Dataset, out_path) -> Path:
    """Run one federation and write its per-round metrics CSV."""
    return write_metrics_csv(run_federation(cfg, train, eval_set), out_path)


def run_name(method: str, fraction: float, seed: int) -> str:
    return f"run_{method}_f{fraction:g}_s{seed}.csv"


def _write_pareto_csv(points: list[ParetoPoint], means: list[tuple], path) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(PARETO_HEADER)
        by_group: dict[tuple, list[ParetoPoint]] = {}
        for p in points:
            by_group.setdefault((p.method, p.fraction), []).append(p)
        for (method, fraction), group in by_group.items():
            for p in group:
                writer.writerow([method, repr(fraction), p.seed,
                                 repr(p.final_accuracy), repr(p.total_energy)])
        for method, fraction, acc, energy in means:
            writer.writerow([method, repr(fraction), "mean", repr(acc), repr(energy)])
    return path


def run_pareto_sweep(plan: ExperimentPlan, out_dir) -> Path:
    """Run every (method, fraction, seed) entry; write per-run metrics CSVs and
    the aggregate pareto.csv. On a failing entry, completed rows are still
    written and SweepError is raised."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    train, eval_set = plan.task.build_datasets()
    points: list[ParetoPoint] = []
    pareto_path = out_dir / "pareto.csv"
    try:
        for method in plan.methods:
            for fraction in plan.fractions:
                for seed in plan.seeds():
                    cfg = replace(
                        plan.base, method=method, sparsity_fraction=fraction, seed=seed
                    )
                    metrics = run_federation(cfg, train, eval_set)
                    write_metrics_csv(metrics, out_dir / run_name(method, fraction, seed))
                    last = metrics[-1]
                    points.append(
                        ParetoPoint(method, fraction, seed, last.accuracy, last.cumulative_energy)
                    )
    except Exception as exc:
        _write_pareto_csv(points, _mean_rows(points, plan), pareto_path)
        raise SweepError(f"sweep aborted after {len(points)} completed entries: {exc}") from exc
    _write_pareto_csv(points, _mean_rows(points, plan), pareto_path)
    return pareto_path


def _mean_rows(points: list[ParetoPoint], plan: ExperimentPlan) -> list[tuple]:
    if plan.repetitions <= 1:
        return []
    rows = []
    for method in plan.methods:
        for fraction in plan.fractions:
            group = [p for p in points if p.method == method and p.fraction == fraction]
            if group:
                rows.append(
                    (method, fraction,
                     float(np.mean([p.final_accuracy for p in group])),
                     float(np.mean([p.total_energy for p in group])))
                )
    return rows
