"""Self-contained verification battery behind the `verify` CLI subcommand.

Aggregates the Monte-Carlo energy checks, the KKT certificate battery and
the enumeration sandwich bound into a single JSON-friendly report. Every
check carries a name, a pass flag and the numbers behind the decision.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import knapsack, theory
from .errors import ConfigurationError


@dataclass
class SuiteSpec:
    d: int = 200
    k: int = 20
    trials: int = 20000
    seed: int = 20260809
    kkt_instances: int = 2000
    kkt_max_d: int = 12
    magnitude_dist: theory.DistributionSpec = field(default_factory=theory.half_normal)
    cost_dist: theory.DistributionSpec = field(default_factory=lambda: theory.two_point(1.0, 5.0))
    cost_levels: list[float] = field(default_factory=lambda: [1.0, 5.0])
    uniform_cost: float = 1.0
    inject_fault: str | None = None

    @classmethod
    def from_dict(cls, raw: dict) -> "SuiteSpec":
        kwargs = dict(raw)
        for key in ("magnitude_dist", "cost_dist"):
            if key in kwargs:
                spec = kwargs[key]
                kwargs[key] = theory.DistributionSpec(spec["kind"], spec.get("params", {}))
        unknown = set(kwargs) - {f for f in cls.__dataclass_fields__}
        if unknown:
            raise ConfigurationError(f"unknown suite keys: {sorted(unknown)}")
        return cls(**kwargs)


def _check(name: str, passed: bool, **details) -> dict:
    return {"name": name, "passed": bool(passed), **details}


def _energy_checks(spec: SuiteSpec) -> list[dict]:
    report = theory.estimate_expected_energies(
        spec.magnitude_dist, spec.cost_dist, spec.d, spec.k, spec.trials, spec.seed
    )
    baseline = spec.k * spec.cost_dist.mean()
    checks = [
        _check(
            "topk_energy_baseline",
            abs(report.mean_energy_topk - baseline) <= 3.0 * report.stderr_topk,
            mean_energy_topk=report.mean_energy_topk,
            expected=baseline,
            stderr=report.stderr_topk,
        )
    ]
    combined = float(np.hypot(report.stderr_topk, report.stderr_cwmp))
    checks.append(
        _check(
            "cwmp_energy_dominance",
            report.mean_energy_cwmp < report.mean_energy_topk - 3.0 * combined,
            mean_energy_topk=report.mean_energy_topk,
            mean_energy_cwmp=report.mean_energy_cwmp,
            combined_stderr=combined,
        )
    )

    uniform = theory.two_point(spec.uniform_cost, spec.uniform_cost)
    uniform_report = theory.estimate_expected_energies(
        spec.magnitude_dist, uniform, spec.d, spec.k, max(1000, spec.trials // 10), spec.seed + 1
    )
    checks.append(
        _check(
            "uniform_cost_equality",
            uniform_report.mean_energy_cwmp == uniform_report.mean_energy_topk,
            mean_energy_topk=uniform_report.mean_energy_topk,
            mean_energy_cwmp=uniform_report.mean_energy_cwmp,
        )
    )
    return checks


def _phi_checks(spec: SuiteSpec) -> list[dict]:
    estimates = theory.estimate_phi_monotonicity(
        spec.magnitude_dist, spec.cost_levels, spec.d, spec.k, spec.trials, spec.seed + 2
    )
    lo, hi = estimates[0], estimates[-1]
    gap_stderr = float(np.hypot(lo.stderr, hi.stderr))
    checks = [
        _check(
            "phi_monotonicity",
            lo.phi - hi.phi > 3.0 * gap_stderr,
            phi=[{"cost": e.cost, "phi": e.phi, "stderr": e.stderr} for e in estimates],
        )
    ]

    freqs = theory.per_index_selection_frequencies(
        spec.magnitude_dist,
        spec.cost_dist,
        spec.d,
        spec.k,
        spec.trials,
        spec.seed + 3,
        method="topk",
    )
    expected = spec.k / spec.d
    band = 4.0 * np.sqrt(expected * (1.0 - expected) / spec.trials)
    checks.append(
        _check(
            "topk_exchangeability",
            bool(np.all(np.abs(freqs - expected) <= band)),
            expected=expected,
            band=float(band),
            max_abs_deviation=float(np.max(np.abs(freqs - expected))),
        )
    )

    mean_cov, cov_stderr = theory.estimate_cost_selection_covariance(
        spec.magnitude_dist, spec.cost_dist, spec.d, spec.k, spec.trials, spec.seed + 4
    )
    checks.append(
        _check(
            "cwmp_cost_covariance",
            mean_cov <= 3.0 * cov_stderr,
            mean_covariance=mean_cov,
            stderr=cov_stderr,
        )
    )
    return checks


def random_knapsack_instance(rng: np.random.Generator, max_d: int) -> knapsack.KnapsackInstance:
    d = int(rng.integers(2, max_d + 1))
    mags = np.abs(rng.normal(0.0, 1.0, d))
    mags[rng.random(d) < 0.1] = 0.0
    costs = rng.uniform(0.1, 2.0, d)
    budget = float(rng.uniform(0.2, 1.2) * costs.sum())
    return knapsack.KnapsackInstance(mags, costs, budget)


def _kkt_battery(spec: SuiteSpec) -> list[dict]:
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed + 5))
    kkt_pass = frac_pass = sandwich_pass = 0
    failures: list[str] = []
    for i in range(spec.kkt_instances):
        inst = random_knapsack_instance(rng, spec.kkt_max_d)
        sol, cert = knapsack.greedy_fractional(inst)
        if spec.inject_fault == "kkt" and i == 0:
            cert = knapsack.KktCertificate(cert.lam + 0.1, cert.alpha, cert.beta)
        check = knapsack.verify_kkt(inst, sol, cert)
        if check:
            kkt_pass += 1
        elif len(failures) < 5:
            failures.append(f"instance {i}: {'; '.join(check.reasons)}")
        n_frac = int(np.count_nonzero((sol.m > 0.0) & (sol.m < 1.0)))
        if n_frac <= 1:
            frac_pass += 1
        _, exact_obj = knapsack.exact_01(inst)
        gap = float(inst.magnitudes.max()) if inst.d else 0.0
        if exact_obj - 1e-9 <= sol.objective <= exact_obj + gap + 1e-9:
            sandwich_pass += 1
    n = spec.kkt_instances
    return [
        _check("kkt_certificates", kkt_pass == n, passed_count=kkt_pass, total=n, failures=failures),
        _check("single_fractional_coordinate", frac_pass == n, passed_count=frac_pass, total=n),
        _check("relaxation_sandwich_bound", sandwich_pass == n, passed_count=sandwich_pass, total=n),
    ]


def _dominance_check(spec: SuiteSpec, instances: int = 5, points: int = 10000) -> dict:
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed + 6))
    ok = True
    worst = -np.inf
    for _ in range(instances):
        inst = random_knapsack_instance(rng, spec.kkt_max_d)
        sol, _ = knapsack.greedy_fractional(inst)
        m = rng.uniform(0.0, 1.0, (points, inst.d))
        used = m @ inst.costs
        over = used > inst.e_budget
        m[over] *= (inst.e_budget / used[over])[:, None]
        objectives = m @ inst.magnitudes
        worst = max(worst, float(objectives.max() - sol.objective))
        ok = ok and bool(np.all(objectives <= sol.objective + 1e-9))
    return _check(
        "greedy_dominates_random_feasible",
        ok,
        instances=instances,
        points_per_instance=points,
        max_excess=worst,
    )


def run_suite(spec: SuiteSpec) -> dict:
    """Run every battery; report is JSON-ready with an all_passed flag."""
    checks = _energy_checks(spec) + _phi_checks(spec) + _kkt_battery(spec)
    checks.append(_dominance_check(spec))
    return {
        "all_passed": all(c["passed"] for c in checks),
        "failed": [c["name"] for c in checks if not c["passed"]],
        "checks": checks,
    }
