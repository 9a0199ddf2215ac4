"""CLI subcommands: run, sweep, verify, partition-stats."""

import csv
import json

import numpy as np
import pytest

import fedsparse.reports as reports
from fedsparse.cli import EXIT_CONFIG, EXIT_FAILURE, EXIT_OK, EXIT_VERIFY, main
from fedsparse.config import ExperimentPlan, TaskConfig, load_plan, parse_config_file
from fedsparse.errors import ConfigurationError
from fedsparse.federation import FederationConfig
from fedsparse.reports import SweepError, run_pareto_sweep

SMALL_TASK = [
    "train_samples = 400",
    "eval_samples = 100",
    "rounds = 3",
]


def write_config(tmp_path, extra=()):
    path = tmp_path / "exp.cfg"
    path.write_text("\n".join([*SMALL_TASK, *extra]) + "\n")
    return str(path)


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


# ---- config parsing ----

def test_parse_config_file(tmp_path):
    path = tmp_path / "c.cfg"
    path.write_text("# comment\nrounds = 7  # trailing\nmethod = topk\n\n")
    assert parse_config_file(path) == {"rounds": "7", "method": "topk"}


def test_parse_config_rejects_garbage(tmp_path):
    path = tmp_path / "c.cfg"
    path.write_text("rounds 7\n")
    with pytest.raises(ConfigurationError):
        parse_config_file(path)
    path.write_text("bogus_key = 3\n")
    with pytest.raises(ConfigurationError):
        load_plan(path)
    path.write_text("rounds = 3\nrounds = 4\n")
    with pytest.raises(ConfigurationError):
        parse_config_file(path)


# ---- run ----

def test_run_row_count_and_determinism(tmp_path, capsys):
    cfg = write_config(tmp_path)
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["run", "--config", cfg, "--method", "topk", "--out", str(out1)]) == EXIT_OK
    assert main(["run", "--config", cfg, "--method", "topk", "--out", str(out2)]) == EXIT_OK
    rows = read_rows(out1)
    assert rows[0] == ["round", "accuracy", "loss", "payload", "round_energy",
                       "cumulative_energy"]
    assert len(rows) == 1 + 3
    assert out1.read_bytes() == out2.read_bytes()


def test_run_dense_payload_is_d(tmp_path):
    cfg = write_config(tmp_path)
    out = tmp_path / "dense.csv"
    assert main(["run", "--config", cfg, "--method", "dense", "--out", str(out)]) == EXIT_OK
    d = 32 * 64 + 64 + 64 * 8 + 8
    assert all(row[3] == str(d) for row in read_rows(out)[1:])


def test_run_rejects_bad_method(tmp_path, capsys):
    cfg = write_config(tmp_path)
    code = main(["run", "--config", cfg, "--method", "nope", "--out", str(tmp_path / "x.csv")])
    assert code == EXIT_CONFIG
    assert "configuration error" in capsys.readouterr().err


def test_run_reports_io_error(tmp_path, capsys):
    cfg = write_config(tmp_path)
    code = main(["run", "--config", cfg, "--out", str(tmp_path / "nosuch" / "x.csv")])
    assert code == 3
    assert "I/O error" in capsys.readouterr().err


# ---- sweep ----

def test_sweep_row_counts(tmp_path):
    cfg = write_config(tmp_path)
    out = tmp_path / "sweep"
    code = main(["sweep", "--config", cfg, "--fractions", "0.05,0.2",
                 "--methods", "topk,cwmp", "--repetitions", "1", "--out-dir", str(out)])
    assert code == EXIT_OK
    rows = read_rows(out / "pareto.csv")
    assert rows[0] == ["method", "fraction", "seed", "final_accuracy", "total_energy"]
    assert len(rows) == 1 + 4  # no mean rows at repetitions=1
    assert sorted((out).glob("run_*.csv"))


def test_sweep_mean_rows_and_uniform_equality(tmp_path):
    cfg = write_config(tmp_path, extra=["classifier_cost = 1.0", "feature_cost = 1.0"])
    out = tmp_path / "sweep"
    code = main(["sweep", "--config", cfg, "--fractions", "1.0",
                 "--methods", "topk,cwmp", "--repetitions", "2", "--out-dir", str(out)])
    assert code == EXIT_OK
    rows = read_rows(out / "pareto.csv")
    assert len(rows) == 1 + 4 + 2  # seed rows + one mean row per method
    by_key = {(r[0], r[2]): (r[3], r[4]) for r in rows[1:]}
    for seed in ("0", "1"):
        assert by_key[("topk", seed)] == by_key[("cwmp", seed)]


def test_sweep_partial_failure_keeps_completed_rows(tmp_path, monkeypatch):
    plan = ExperimentPlan(
        base=FederationConfig(rounds=2),
        task=TaskConfig(train_samples=300, eval_samples=80),
        fractions=[0.1],
        methods=["topk", "cwmp"],
        repetitions=1,
    )
    real = reports.run_federation
    calls = []

    def failing(cfg, train, eval_set, mask_log=None):
        calls.append(cfg.method)
        if cfg.method == "cwmp":
            raise RuntimeError("boom")
        return real(cfg, train, eval_set, mask_log)

    monkeypatch.setattr(reports, "run_federation", failing)
    out = tmp_path / "sweep"
    with pytest.raises(SweepError):
        run_pareto_sweep(plan, out)
    rows = read_rows(out / "pareto.csv")
    assert len(rows) == 2 and rows[1][0] == "topk"
    assert calls == ["topk", "cwmp"]


# ---- verify ----

def test_verify_passes_and_writes_report(tmp_path):
    report_path = tmp_path / "report.json"
    code = main(["verify", "--trials", "1500", "--kkt-instances", "150",
                 "--out", str(report_path)])
    assert code == EXIT_OK
    report = json.loads(report_path.read_text())
    assert report["all_passed"] is True
    names = {c["name"] for c in report["checks"]}
    assert {"topk_energy_baseline", "cwmp_energy_dominance", "uniform_cost_equality",
            "phi_monotonicity", "kkt_certificates",
            "relaxation_sandwich_bound"} <= names


def test_verify_uniform_scenario_reports_exact_equality(tmp_path):
    report_path = tmp_path / "report.json"
    main(["verify", "--trials", "1200", "--kkt-instances", "100", "--out", str(report_path)])
    checks = {c["name"]: c for c in json.loads(report_path.read_text())["checks"]}
    uniform = checks["uniform_cost_equality"]
    assert uniform["mean_energy_topk"] == uniform["mean_energy_cwmp"]


def test_verify_corrupted_certificate_fails_with_name(tmp_path, capsys):
    code = main(["verify", "--trials", "1200", "--kkt-instances", "100",
                 "--inject-fault", "kkt"])
    assert code == EXIT_VERIFY
    captured = capsys.readouterr()
    assert "kkt_certificates" in captured.err
    report = json.loads(captured.out)
    assert report["all_passed"] is False
    assert "kkt_certificates" in report["failed"]


def test_verify_suite_file(tmp_path):
    suite = tmp_path / "suite.json"
    suite.write_text(json.dumps({
        "d": 60, "k": 6, "trials": 1200, "kkt_instances": 120, "seed": 5,
        "magnitude_dist": {"kind": "exponential", "params": {"scale": 1.0}},
        "cost_dist": {"kind": "two-point", "params": {"low": 1.0, "high": 5.0}},
    }))
    assert main(["verify", "--suite", str(suite)]) == EXIT_OK
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"nonsense": 1}))
    assert main(["verify", "--suite", str(bad)]) == EXIT_CONFIG


def test_run_with_csv_datasets(tmp_path):
    from fedsparse.data import make_synthetic_task, save_csv_dataset

    train, eval_set = make_synthetic_task(n_train=300, n_eval=80, seed=9)
    save_csv_dataset(train, tmp_path / "train.csv")
    save_csv_dataset(eval_set, tmp_path / "eval.csv")
    cfg = tmp_path / "exp.cfg"
    cfg.write_text(
        f"rounds = 2\ntrain_csv = {tmp_path / 'train.csv'}\n"
        f"eval_csv = {tmp_path / 'eval.csv'}\n"
    )
    out = tmp_path / "csv_run.csv"
    assert main(["run", "--config", str(cfg), "--out", str(out)]) == EXIT_OK
    assert len(read_rows(out)) == 1 + 2


# ---- partition-stats ----

def test_partition_stats_histograms_sum_to_dataset(tmp_path, capsys):
    cfg = write_config(tmp_path)
    out = tmp_path / "stats.json"
    assert main(["partition-stats", "--config", cfg, "--out", str(out)]) == EXIT_OK
    stats = json.loads(out.read_text())
    assert len(stats["clients"]) == 10
    assert sum(c["samples"] for c in stats["clients"]) == 400
    for c in stats["clients"]:
        assert sum(c["label_histogram"]) == c["samples"]
