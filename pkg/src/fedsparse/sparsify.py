"""Pruning masks, efficiency scores and energy accounting.

Selection rules:
  top_k_mask   -- k largest |g_j|
  cwmp_mask    -- k largest efficiency scores |g_j| / c_j
  random_k_mask -- k uniformly random indices (control baseline)

Ties in either criterion break by ascending index, so with a uniform cost
vector cwmp_mask and top_k_mask produce identical masks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .model import ModelParams


@dataclass
class PruningMask:
    """Support set of a sparse update: sorted unique indices into 0..d-1."""

    indices: np.ndarray
    d: int

    def __post_init__(self):
        self.indices = np.asarray(self.indices, dtype=np.int64)
        if self.indices.ndim != 1:
            raise ConfigurationError("mask indices must be 1-D")
        if self.indices.size:
            if self.indices.min() < 0 or self.indices.max() >= self.d:
                raise ConfigurationError("mask index out of range")
            if np.any(np.diff(self.indices) <= 0):
                raise ConfigurationError("mask indices must be strictly ascending")

    @property
    def k(self) -> int:
        return self.indices.size

    def to_dense(self) -> np.ndarray:
        m = np.zeros(self.d)
        m[self.indices] = 1.0
        return m


@dataclass
class SparseUpdate:
    """Gradient entries on a mask's support; densify() zero-fills off-support."""

    indices: np.ndarray
    values: np.ndarray
    d: int

    def __post_init__(self):
        self.indices = np.asarray(self.indices, dtype=np.int64)
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.indices.shape != self.values.shape:
            raise ConfigurationError("sparse update indices/values length mismatch")

    @property
    def payload(self) -> int:
        return self.indices.size

    def densify(self) -> np.ndarray:
        out = np.zeros(self.d)
        out[self.indices] = self.values
        return out


@dataclass
class EnergyReport:
    energy: float
    payload_indices: int
    sparsity_budget_k: int


def build_cost_vector(params: ModelParams, classifier_cost: float, feature_cost: float) -> np.ndarray:
    """Per-parameter cost: classifier_cost on the final layer, feature_cost elsewhere."""
    if classifier_cost <= 0 or feature_cost <= 0:
        raise ConfigurationError("costs must be strictly positive")
    costs = np.full(params.d, float(feature_cost))
    costs[params.layer_slices()[-1]] = float(classifier_cost)
    return costs


def check_costs(costs: np.ndarray, d: int) -> np.ndarray:
    costs = np.asarray(costs, dtype=np.float64)
    if costs.shape != (d,):
        raise ConfigurationError(f"cost vector shape {costs.shape} != ({d},)")
    if np.any(costs <= 0):
        raise ConfigurationError("cost vector must be strictly positive")
    return costs


def k_from_fraction(fraction: float, d: int) -> int:
    """Sparsity budget from a fraction: max(1, round(fraction * d))."""
    if not 0.0 < fraction <= 1.0:
        raise ConfigurationError(f"sparsity fraction must be in (0, 1], got {fraction}")
    return max(1, int(round(fraction * d)))


def _largest_k(keys: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k largest keys; ties broken by ascending index."""
    d = keys.size
    if not 1 <= k <= d:
        raise ConfigurationError(f"k must be in [1, {d}], got {k}")
    order = np.argsort(-keys, kind="stable")
    return np.sort(order[:k])


def top_k_mask(grad: np.ndarray, k: int) -> PruningMask:
    grad = np.asarray(grad, dtype=np.float64)
    return PruningMask(_largest_k(np.abs(grad), k), grad.size)


def efficiency_scores(grad: np.ndarray, costs: np.ndarray) -> np.ndarray:
    """Elementwise |g_j| / c_j: gradient magnitude per unit of energy."""
    grad = np.asarray(grad, dtype=np.float64)
    costs = check_costs(costs, grad.size)
    return np.abs(grad) / costs


def cwmp_mask(grad: np.ndarray, costs: np.ndarray, k: int) -> PruningMask:
    grad = np.asarray(grad, dtype=np.float64)
    return PruningMask(_largest_k(efficiency_scores(grad, costs), k), grad.size)


def random_k_mask(d: int, k: int, rng: np.random.Generator) -> PruningMask:
    if not 1 <= k <= d:
        raise ConfigurationError(f"k must be in [1, {d}], got {k}")
    return PruningMask(np.sort(rng.choice(d, size=k, replace=False)), d)


def apply_mask(grad: np.ndarray, mask: PruningMask) -> SparseUpdate:
    grad = np.asarray(grad, dtype=np.float64)
    if grad.size != mask.d:
        raise ConfigurationError(f"gradient length {grad.size} != mask dimension {mask.d}")
    return SparseUpdate(mask.indices, grad[mask.indices], mask.d)


def energy_of(mask: PruningMask, costs: np.ndarray, budget_k: int | None = None) -> EnergyReport:
    """Total energy of a mask: sum of selected costs in ascending index order."""
    costs = check_costs(costs, mask.d)
    energy = float(np.sum(costs[mask.indices]))
    return EnergyReport(energy, mask.k, mask.k if budget_k is None else budget_k)
