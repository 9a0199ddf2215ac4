"""Command-line experiment driver.

Subcommands:
  run              one federation run -> per-round metrics CSV
  sweep            methods x sparsity fractions x seeds -> pareto.csv + run CSVs
  verify           theory/KKT verification battery -> JSON report
  partition-stats  per-client label histograms for the Dirichlet partition

Exit codes: 0 success, 2 configuration error, 3 I/O error,
4 verification/assertion failure, 1 other failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .config import load_plan
from .data import partition_dirichlet
from .errors import ConfigurationError
from .reports import SweepError, run_pareto_sweep, run_single
from .verify import SuiteSpec, run_suite

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_VERIFY = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fedsparse", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one federation and write a metrics CSV")
    run_p.add_argument("--config", help="flat key=value config file")
    run_p.add_argument("--method", help="dense | topk | cwmp | random-k")
    run_p.add_argument("--sparsity", type=float, help="sparsity fraction in (0, 1]")
    run_p.add_argument("--seed", type=int)
    run_p.add_argument("--rounds", type=int)
    run_p.add_argument("--out", required=True, help="output metrics CSV path")

    sweep_p = sub.add_parser("sweep", help="Pareto sweep over methods and fractions")
    sweep_p.add_argument("--config", help="flat key=value config file")
    sweep_p.add_argument("--fractions", help="comma list, e.g. 0.01,0.05,0.1,0.2")
    sweep_p.add_argument("--methods", help="comma list, e.g. topk,cwmp")
    sweep_p.add_argument("--repetitions", type=int)
    sweep_p.add_argument("--seed", type=int)
    sweep_p.add_argument("--out-dir", required=True)

    verify_p = sub.add_parser("verify", help="run the theory verification suite")
    verify_p.add_argument("--suite", help="JSON suite spec (defaults built in)")
    verify_p.add_argument("--trials", type=int)
    verify_p.add_argument("--kkt-instances", type=int)
    verify_p.add_argument("--seed", type=int)
    verify_p.add_argument("--out", help="write the JSON report here")
    verify_p.add_argument(
        "--inject-fault", choices=["kkt"], help="corrupt one certificate (negative-path testing)"
    )

    stats_p = sub.add_parser("partition-stats", help="per-client label histograms")
    stats_p.add_argument("--config", help="flat key=value config file")
    stats_p.add_argument("--seed", type=int)
    stats_p.add_argument("--out", help="write the JSON histograms here")
    return parser


def _cmd_run(args) -> int:
    overrides = {"seed": args.seed, "rounds": args.rounds, "method": args.method,
                 "sparsity_fraction": args.sparsity}
    plan = load_plan(args.config, overrides)
    train, eval_set = plan.task.build_datasets()
    path = run_single(plan.base, train, eval_set, args.out)
    print(f"wrote {path}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    overrides = {"seed": args.seed, "sweep_fractions": args.fractions,
                 "sweep_methods": args.methods, "repetitions": args.repetitions}
    plan = load_plan(args.config, overrides)
    path = run_pareto_sweep(plan, args.out_dir)
    print(f"wrote {path}")
    return EXIT_OK


def _cmd_verify(args) -> int:
    spec = SuiteSpec.from_dict(json.loads(Path(args.suite).read_text())) if args.suite else SuiteSpec()
    if args.trials:
        spec = replace(spec, trials=args.trials)
    if args.kkt_instances:
        spec = replace(spec, kkt_instances=args.kkt_instances)
    if args.seed is not None:
        spec = replace(spec, seed=args.seed)
    if args.inject_fault:
        spec = replace(spec, inject_fault=args.inject_fault)
    report = run_suite(spec)
    text = json.dumps(report, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(text)
    if not report["all_passed"]:
        print(f"FAILED checks: {', '.join(report['failed'])}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def _cmd_partition_stats(args) -> int:
    plan = load_plan(args.config, {"seed": args.seed})
    train, _ = plan.task.build_datasets()
    clients = partition_dirichlet(
        train, plan.base.num_clients, plan.base.dirichlet_alpha, plan.base.seed
    )
    stats = {
        "num_clients": plan.base.num_clients,
        "dirichlet_alpha": plan.base.dirichlet_alpha,
        "seed": plan.base.seed,
        "clients": [
            {"client": i, "samples": c.n, "label_histogram": c.label_histogram().tolist()}
            for i, c in enumerate(clients)
        ],
    }
    text = json.dumps(stats, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(text)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "sweep": _cmd_sweep,
        "verify": _cmd_verify,
        "partition-stats": _cmd_partition_stats,
    }
    try:
        return handlers[args.command](args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except SweepError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
