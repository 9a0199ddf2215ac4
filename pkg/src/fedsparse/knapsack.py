"""Energy-budgeted projection: greedy fractional knapsack with KKT certificates.

greedy_fractional solves the continuous relaxation of "maximize selected
gradient mass subject to an energy budget" by descending efficiency score,
and returns the dual multipliers that certify optimality. exact_01 is a
brute-force 0/1 oracle for small instances; verify_kkt checks a certificate
from scratch. budgeted_cwmp is the integral greedy honoring both the
cardinality and energy constraints.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .sparsify import PruningMask

KKT_TOL = 1e-9
FEAS_SLACK = 1e-12
ENUM_MAX_D = 20


@dataclass
class KnapsackInstance:
    magnitudes: np.ndarray
    costs: np.ndarray
    e_budget: float
    k_sparsity: int | None = None

    def __post_init__(self):
        self.magnitudes = np.asarray(self.magnitudes, dtype=np.float64)
        self.costs = np.asarray(self.costs, dtype=np.float64)
        if self.magnitudes.shape != self.costs.shape or self.magnitudes.ndim != 1:
            raise ConfigurationError("magnitudes and costs must be 1-D and equal length")
        if np.any(self.magnitudes < 0):
            raise ConfigurationError("magnitudes must be non-negative")
        if np.any(self.costs <= 0):
            raise ConfigurationError("costs must be strictly positive")
        if self.e_budget <= 0:
            raise ConfigurationError("e_budget must be > 0")
        if self.k_sparsity is not None and self.k_sparsity < 0:
            raise ConfigurationError("k_sparsity must be >= 0")

    @property
    def d(self) -> int:
        return self.magnitudes.size

    def scores(self) -> np.ndarray:
        return self.magnitudes / self.costs


@dataclass
class FractionalSolution:
    m: np.ndarray
    objective: float
    energy_used: float


@dataclass
class KktCertificate:
    lam: float
    alpha: np.ndarray
    beta: np.ndarray


@dataclass
class KktCheck:
    ok: bool
    reasons: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


def greedy_fractional(inst: KnapsackInstance) -> tuple[FractionalSolution, KktCertificate]:
    """Fill by descending score; the marginal item is filled fractionally.

    The certificate's lambda is the marginal item's score: the fractional
    item's, or the last fully selected item's when the budget is exhausted
    exactly; 0 when every item fits. alpha/beta follow from stationarity:
    selected => beta_j = |g_j| - lambda*c_j, rejected => alpha_j = lambda*c_j - |g_j|.
    """
    s = inst.scores()
    order = np.argsort(-s, kind="stable")
    m = np.zeros(inst.d)
    remaining = float(inst.e_budget)
    lam = 0.0
    last_score = 0.0
    for idx in order:
        c = inst.costs[idx]
        if remaining <= 0.0:
            lam = last_score
            break
        if c <= remaining:
            m[idx] = 1.0
            remaining -= c
            last_score = float(s[idx])
            continue
        m[idx] = remaining / c
        remaining = 0.0
        lam = float(s[idx])
        break
    # Tiny float negatives from ties are clamped; stationarity stays within KKT_TOL.
    slack = inst.magnitudes - lam * inst.costs
    beta = np.where(m > 0.0, np.maximum(slack, 0.0), 0.0)
    alpha = np.where(m < 1.0, np.maximum(-slack, 0.0), 0.0)
    frac = (m > 0.0) & (m < 1.0)
    beta[frac] = 0.0
    alpha[frac] = 0.0
    sol = FractionalSolution(m, float(m @ inst.magnitudes), float(m @ inst.costs))
    return sol, KktCertificate(lam, alpha, beta)


def verify_kkt(
    inst: KnapsackInstance,
    sol: FractionalSolution,
    cert: KktCertificate,
    tol: float = KKT_TOL,
) -> KktCheck:
    """Check primal/dual feasibility, stationarity and complementary slackness.

    Also applies the three-case threshold test: fully selected components must
    have score >= lambda, rejected ones <= lambda, fractional ones == lambda.
    """
    m = np.asarray(sol.m, dtype=np.float64)
    if m.shape != inst.magnitudes.shape:
        raise ConfigurationError("solution length does not match instance")
    reasons: list[str] = []

    if np.any(m < -tol) or np.any(m > 1.0 + tol):
        reasons.append("primal: m outside [0, 1]")
    energy = float(m @ inst.costs)
    if energy > inst.e_budget + FEAS_SLACK:
        reasons.append(f"primal: energy {energy} exceeds budget {inst.e_budget}")

    if cert.lam < -tol:
        reasons.append("dual: lambda < 0")
    if np.any(cert.alpha < -tol):
        reasons.append("dual: alpha < 0")
    if np.any(cert.beta < -tol):
        reasons.append("dual: beta < 0")

    stat = inst.magnitudes - cert.lam * inst.costs - (cert.beta - cert.alpha)
    if np.any(np.abs(stat) > tol):
        j = int(np.argmax(np.abs(stat)))
        reasons.append(f"stationarity violated at j={j} (residual {stat[j]:.3e})")

    if np.any(np.abs(cert.alpha * m) > tol):
        reasons.append("complementary slackness: alpha_j * m_j != 0")
    if np.any(np.abs(cert.beta * (m - 1.0)) > tol):
        reasons.append("complementary slackness: beta_j * (m_j - 1) != 0")
    if abs(cert.lam * (inst.e_budget - energy)) > tol * max(1.0, float(inst.e_budget)):
        reasons.append("complementary slackness: lambda * budget slack != 0")

    s = inst.scores()
    selected = m >= 1.0 - tol
    rejected = m <= tol
    fractional = ~selected & ~rejected
    if np.any(s[selected] < cert.lam - tol):
        reasons.append("threshold: selected component with score < lambda")
    if np.any(s[rejected] > cert.lam + tol):
        reasons.append("threshold: rejected component with score > lambda")
    if np.any(np.abs(s[fractional] - cert.lam) > tol):
        reasons.append("threshold: fractional component with score != lambda")

    return KktCheck(not reasons, reasons)


def exact_01(inst: KnapsackInstance) -> tuple[np.ndarray, float]:
    """Exhaustive 0/1 optimum over all subsets; test oracle, d <= 20 only."""
    d = inst.d
    if d > ENUM_MAX_D:
        raise ConfigurationError(f"exact_01 enumerates subsets; d={d} exceeds {ENUM_MAX_D}")
    bits = ((np.arange(1 << d)[:, None] >> np.arange(d)) & 1).astype(np.float64)
    energy = bits @ inst.costs
    feasible = energy <= inst.e_budget + FEAS_SLACK
    if inst.k_sparsity is not None:
        feasible &= bits.sum(axis=1) <= inst.k_sparsity
    objective = bits @ inst.magnitudes
    objective[~feasible] = -np.inf
    best = int(np.argmax(objective))
    return bits[best].astype(np.int64), float(objective[best])


def budgeted_cwmp(grad: np.ndarray, costs: np.ndarray, k: int, e_budget: float) -> PruningMask:
    """Greedy joint-constraint selection: admit by descending score while
    the cardinality budget k and the energy budget both still hold; stop at
    the first item that does not fit. May return fewer than k indices."""
    grad = np.asarray(grad, dtype=np.float64)
    costs = np.asarray(costs, dtype=np.float64)
    if grad.shape != costs.shape:
        raise ConfigurationError("gradient and cost lengths differ")
    if np.any(costs <= 0):
        raise ConfigurationError("costs must be strictly positive")
    if k < 1:
        raise ConfigurationError(f"k must be >= 1, got {k}")
    if e_budget <= 0:
        raise ConfigurationError("e_budget must be > 0")
    s = np.abs(grad) / costs
    order = np.argsort(-s, kind="stable")
    selected: list[int] = []
    used = 0.0
    for idx in order:
        if len(selected) >= k or used + costs[idx] > e_budget:
            break
        selected.append(int(idx))
        used += costs[idx]
    return PruningMask(np.sort(np.asarray(selected, dtype=np.int64)), grad.size)
