"""Acceptance: render real sweep/convergence CSVs produced by the fedsparse CLI.

The primary package is driven only through its external interface (the CLI
and its documented CSV schemas).
"""

import subprocess
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pytest

from fedsparse_figures.render import FigureSpec, SchemaError, plot_pareto, read_rows, render

FRACTIONS = "0.05,0.2"
METHODS = ["topk", "cwmp"]


@pytest.fixture(scope="module")
def sweep_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    cfg = root / "exp.cfg"
    cfg.write_text("train_samples = 400\neval_samples = 100\nrounds = 6\n")
    out = root / "results"
    subprocess.run(
        [sys.executable, "-m", "fedsparse", "sweep", "--config", str(cfg),
         "--fractions", FRACTIONS, "--methods", ",".join(METHODS),
         "--repetitions", "2", "--out-dir", str(out)],
        check=True, capture_output=True,
    )
    return out


def test_pareto_figure_from_cli_sweep(sweep_dir, tmp_path):
    paths = render(FigureSpec([sweep_dir / "pareto.csv"], tmp_path / "pareto", "pareto"))
    assert {p.suffix for p in paths} == {".png", ".svg"}
    assert all(p.stat().st_size > 0 for p in paths)
    rows = read_rows(sweep_dir / "pareto.csv", ["method"])
    fig, ax = plt.subplots()
    series = plot_pareto(rows, ax)
    assert set(series) == set(METHODS)  # one series per method
    plt.close(fig)


def test_convergence_figure_from_cli_runs(sweep_dir, tmp_path):
    inputs = [sweep_dir / f"run_{m}_f0.2_s0.csv" for m in METHODS]
    assert all(p.exists() for p in inputs)
    paths = render(FigureSpec(inputs, tmp_path / "convergence", "convergence"))
    assert all(p.stat().st_size > 0 for p in paths)
    for path in inputs:
        assert len(read_rows(path, ["round", "accuracy"])) == 6


def test_schema_violation_names_column(sweep_dir, tmp_path):
    mangled = tmp_path / "mangled.csv"
    lines = (sweep_dir / "pareto.csv").read_text().splitlines()
    header = lines[0].replace("total_energy", "energy")
    mangled.write_text("\n".join([header] + lines[1:]) + "\n")
    with pytest.raises(SchemaError, match="total_energy"):
        render(FigureSpec([mangled], tmp_path / "nope", "pareto"))
