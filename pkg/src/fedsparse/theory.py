"""Monte-Carlo checks of the expected-energy behaviour of the selection rules.

For i.i.d. magnitudes and costs the energy-agnostic top-k rule pays k*E[C]
in expectation, while cost-weighted selection pays no more, with equality
exactly when costs are uniform. The estimators here draw instances from
named distributions, run both mask rules, and report means with standard
errors so the inequalities can be tested at fixed sigma thresholds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import ConfigurationError
from .sparsify import PruningMask, cwmp_mask, energy_of, top_k_mask

KINDS = ("half-normal", "exponential", "uniform", "two-point")


@dataclass(frozen=True)
class DistributionSpec:
    """A named scalar law: half-normal, exponential, uniform or two-point."""

    kind: str
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"unknown distribution kind {self.kind!r}")
        p = dict(self.params)
        if self.kind == "half-normal":
            if p.get("sigma", 1.0) <= 0:
                raise ConfigurationError("half-normal sigma must be > 0")
        elif self.kind == "exponential":
            if p.get("scale", 1.0) <= 0:
                raise ConfigurationError("exponential scale must be > 0")
        elif self.kind == "uniform":
            if "low" not in p or "high" not in p or p["low"] >= p["high"]:
                raise ConfigurationError("uniform requires low < high")
        elif self.kind == "two-point":
            if "low" not in p or "high" not in p or p["low"] > p["high"]:
                raise ConfigurationError("two-point requires low <= high")
            if not 0.0 < p.get("p_low", 0.5) < 1.0:
                raise ConfigurationError("two-point p_low must be in (0, 1)")

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        p = self.params
        if self.kind == "half-normal":
            return np.abs(rng.normal(0.0, p.get("sigma", 1.0), size))
        if self.kind == "exponential":
            return rng.exponential(p.get("scale", 1.0), size)
        if self.kind == "uniform":
            return rng.uniform(p["low"], p["high"], size)
        draws = rng.random(size)
        return np.where(draws < p.get("p_low", 0.5), p["low"], p["high"])

    def mean(self) -> float:
        p = self.params
        if self.kind == "half-normal":
            return p.get("sigma", 1.0) * np.sqrt(2.0 / np.pi)
        if self.kind == "exponential":
            return p.get("scale", 1.0)
        if self.kind == "uniform":
            return 0.5 * (p["low"] + p["high"])
        pl = p.get("p_low", 0.5)
        return pl * p["low"] + (1.0 - pl) * p["high"]

    def strictly_positive(self) -> bool:
        p = self.params
        if self.kind == "uniform":
            return p["low"] > 0
        if self.kind == "two-point":
            return p["low"] > 0
        return True  # half-normal / exponential draws are > 0 almost surely


def half_normal(sigma: float = 1.0) -> DistributionSpec:
    return DistributionSpec("half-normal", {"sigma": sigma})


def exponential(scale: float = 1.0) -> DistributionSpec:
    return DistributionSpec("exponential", {"scale": scale})


def uniform(low: float, high: float) -> DistributionSpec:
    return DistributionSpec("uniform", {"low": low, "high": high})


def two_point(low: float, high: float, p_low: float = 0.5) -> DistributionSpec:
    return DistributionSpec("two-point", {"low": low, "high": high, "p_low": p_low})


@dataclass
class PhiEstimate:
    """Selection frequency of indices carrying one cost level."""

    cost: float
    phi: float
    stderr: float


@dataclass
class McReport:
    trials: int
    d: int
    k: int
    mean_energy_topk: float
    mean_energy_cwmp: float
    stderr_topk: float
    stderr_cwmp: float
    phi_estimates: list[PhiEstimate] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "d": self.d,
            "k": self.k,
            "mean_energy_topk": self.mean_energy_topk,
            "mean_energy_cwmp": self.mean_energy_cwmp,
            "stderr_topk": self.stderr_topk,
            "stderr_cwmp": self.stderr_cwmp,
            "phi_estimates": [
                {"cost": e.cost, "phi": e.phi, "stderr": e.stderr} for e in self.phi_estimates
            ],
        }


def _require_cost_spec(spec: DistributionSpec) -> None:
    if not spec.strictly_positive():
        raise ConfigurationError("cost distribution must have strictly positive support")


def sample_instance(
    spec_g: DistributionSpec,
    spec_c: DistributionSpec,
    d: int,
    rng_seed,
) -> tuple[np.ndarray, np.ndarray]:
    """Draw d i.i.d. magnitudes and costs from independent substreams."""
    if d < 1:
        raise ConfigurationError(f"d must be >= 1, got {d}")
    _require_cost_spec(spec_c)
    root = rng_seed if isinstance(rng_seed, np.random.SeedSequence) else np.random.SeedSequence(rng_seed)
    g_ss, c_ss = root.spawn(2)
    magnitudes = spec_g.sample(np.random.default_rng(g_ss), d)
    costs = spec_c.sample(np.random.default_rng(c_ss), d)
    return magnitudes, costs


def _stderr(samples: np.ndarray) -> float:
    if samples.size < 2:
        return 0.0
    return float(np.std(samples, ddof=1) / np.sqrt(samples.size))


def estimate_expected_energies(
    spec_g: DistributionSpec,
    spec_c: DistributionSpec,
    d: int,
    k: int,
    trials: int,
    seed: int,
) -> McReport:
    """Mean mask energy of top-k vs cost-weighted selection over i.i.d. trials.

    For two-point cost laws the report also carries the per-cost-level
    selection frequency of the cost-weighted rule.
    """
    if not 1 <= k <= d:
        raise ConfigurationError(f"k must be in [1, {d}], got {k}")
    if trials < 1:
        raise ConfigurationError("trials must be >= 1")
    children = np.random.SeedSequence(seed).spawn(trials)
    e_topk = np.empty(trials)
    e_cwmp = np.empty(trials)
    track_phi = spec_c.kind == "two-point"
    if track_phi:
        levels = [spec_c.params["low"], spec_c.params["high"]]
        sel = np.zeros(2, dtype=np.int64)
        tot = np.zeros(2, dtype=np.int64)
    for t in range(trials):
        mags, costs = sample_instance(spec_g, spec_c, d, children[t])
        m_top = top_k_mask(mags, k)
        m_cw = cwmp_mask(mags, costs, k)
        e_topk[t] = energy_of(m_top, costs, budget_k=k).energy
        e_cwmp[t] = energy_of(m_cw, costs, budget_k=k).energy
        if track_phi:
            picked = np.zeros(d, dtype=bool)
            picked[m_cw.indices] = True
            for i, level in enumerate(levels):
                at_level = costs == level
                sel[i] += int(np.count_nonzero(picked & at_level))
                tot[i] += int(np.count_nonzero(at_level))
    phi_estimates = []
    if track_phi:
        for i, level in enumerate(levels):
            if tot[i] == 0:
                continue
            phi = sel[i] / tot[i]
            phi_estimates.append(
                PhiEstimate(level, float(phi), float(np.sqrt(phi * (1 - phi) / tot[i])))
            )
    return McReport(
        trials=trials,
        d=d,
        k=k,
        mean_energy_topk=float(np.mean(e_topk)),
        mean_energy_cwmp=float(np.mean(e_cwmp)),
        stderr_topk=_stderr(e_topk),
        stderr_cwmp=_stderr(e_cwmp),
        phi_estimates=phi_estimates,
    )


def block_costs(cost_levels: list[float], d: int) -> np.ndarray:
    """Deterministic cost vector: equal contiguous index blocks, one per level."""
    levels = [float(v) for v in cost_levels]
    if len(levels) < 2:
        raise ConfigurationError("need at least two cost levels")
    if any(b < a for a, b in zip(levels, levels[1:])):
        raise ConfigurationError("cost levels must be non-decreasing")
    if any(v <= 0 for v in levels):
        raise ConfigurationError("cost levels must be strictly positive")
    if d % len(levels) != 0:
        raise ConfigurationError(f"d={d} not divisible into {len(levels)} equal blocks")
    return np.repeat(levels, d // len(levels))


def estimate_phi_monotonicity(
    spec_g: DistributionSpec,
    cost_levels: list[float],
    d: int,
    k: int,
    trials: int,
    seed: int,
) -> list[PhiEstimate]:
    """Cost-weighted selection frequency per cost level, on fixed equal blocks."""
    if not 1 <= k <= d:
        raise ConfigurationError(f"k must be in [1, {d}], got {k}")
    costs = block_costs(cost_levels, d)
    n_levels = len(cost_levels)
    block = d // n_levels
    children = np.random.SeedSequence(seed).spawn(trials)
    fractions = np.empty((trials, n_levels))
    for t in range(trials):
        mags = spec_g.sample(np.random.default_rng(children[t]), d)
        picked = np.zeros(d, dtype=bool)
        picked[cwmp_mask(mags, costs, k).indices] = True
        for b in range(n_levels):
            fractions[t, b] = np.count_nonzero(picked[b * block : (b + 1) * block]) / block
    return [
        PhiEstimate(float(cost_levels[b]), float(np.mean(fractions[:, b])), _stderr(fractions[:, b]))
        for b in range(n_levels)
    ]


def per_index_selection_frequencies(
    spec_g: DistributionSpec,
    spec_c: DistributionSpec,
    d: int,
    k: int,
    trials: int,
    seed: int,
    method: str = "topk",
) -> np.ndarray:
    """Per-index selection frequency under i.i.d. draws; k/d for every index
    in exact exchangeable theory."""
    if method not in ("topk", "cwmp"):
        raise ConfigurationError(f"method must be topk or cwmp, got {method!r}")
    children = np.random.SeedSequence(seed).spawn(trials)
    counts = np.zeros(d, dtype=np.int64)
    for t in range(trials):
        mags, costs = sample_instance(spec_g, spec_c, d, children[t])
        mask = top_k_mask(mags, k) if method == "topk" else cwmp_mask(mags, costs, k)
        counts[mask.indices] += 1
    return counts / trials


def estimate_cost_selection_covariance(
    spec_g: DistributionSpec,
    spec_c: DistributionSpec,
    d: int,
    k: int,
    trials: int,
    seed: int,
) -> tuple[float, float]:
    """Mean per-trial sample covariance between cost and the cost-weighted
    selection indicator, with its standard error. Non-positive in theory."""
    children = np.random.SeedSequence(seed).spawn(trials)
    covs = np.empty(trials)
    for t in range(trials):
        mags, costs = sample_instance(spec_g, spec_c, d, children[t])
        picked = np.zeros(d)
        picked[cwmp_mask(mags, costs, k).indices] = 1.0
        covs[t] = np.mean((costs - costs.mean()) * (picked - picked.mean()))
    return float(np.mean(covs)), _stderr(covs)
