"""Federated averaging with pluggable sparsification and energy accounting.

Each round: broadcast the global parameters, every client runs local
momentum-SGD and reports the pseudo-gradient (global - local) / lr, the
configured mask rule compresses it, and the server applies the weighted sum
with the same learning rate. With the dense method this reduces exactly to
weighted parameter averaging.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import ClientDataset, Dataset, partition_dirichlet
from .errors import ConfigurationError
from .model import Batch, ModelParams, backward, forward, init_params, mlp_layers, sgd_step
from .sparsify import (
    PruningMask,
    SparseUpdate,
    apply_mask,
    build_cost_vector,
    cwmp_mask,
    energy_of,
    k_from_fraction,
    random_k_mask,
    top_k_mask,
)

METHODS = ("dense", "topk", "cwmp", "random-k")


@dataclass
class FederationConfig:
    num_clients: int = 10
    rounds: int = 50
    learning_rate: float = 0.05
    momentum: float = 0.9
    batch_size: int = 64
    local_steps: int = 10
    sparsity_fraction: float = 0.10
    method: str = "cwmp"
    dirichlet_alpha: float = 0.5
    seed: int = 0
    classifier_cost: float = 5.0
    feature_cost: float = 1.0
    hidden_dim: int = 64
    client_weights: list[float] | None = None

    def __post_init__(self):
        if self.num_clients < 1 or self.rounds < 1:
            raise ConfigurationError("num_clients and rounds must be >= 1")
        if self.learning_rate <= 0:
            raise ConfigurationError("learning_rate must be > 0")
        if not 0.0 <= self.momentum < 1.0:
            raise ConfigurationError("momentum must be in [0, 1)")
        if self.batch_size < 1 or self.local_steps < 1 or self.hidden_dim < 1:
            raise ConfigurationError("batch_size, local_steps and hidden_dim must be >= 1")
        if not 0.0 < self.sparsity_fraction <= 1.0:
            raise ConfigurationError("sparsity_fraction must be in (0, 1]")
        if self.method not in METHODS:
            raise ConfigurationError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.dirichlet_alpha <= 0:
            raise ConfigurationError("dirichlet_alpha must be > 0")
        if self.classifier_cost <= 0 or self.feature_cost <= 0:
            raise ConfigurationError("cost model entries must be > 0")
        if self.client_weights is not None:
            w = np.asarray(self.client_weights, dtype=np.float64)
            if w.shape != (self.num_clients,) or np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
                raise ConfigurationError("client_weights must be a simplex over num_clients")


@dataclass
class RoundMetrics:
    round: int
    accuracy: float
    loss: float
    payload: int
    round_energy: float
    cumulative_energy: float


def sample_batch(client: Dataset, batch_size: int, rng: np.random.Generator) -> Batch:
    """Minibatch without replacement; clients smaller than the batch train full-batch."""
    if client.n == 0:
        raise ValueError("client dataset is empty")
    if client.n <= batch_size:
        return Batch(client.features, client.labels)
    idx = rng.choice(client.n, size=batch_size, replace=False)
    return Batch(client.features[idx], client.labels[idx])


def client_update(
    global_params: ModelParams,
    client: Dataset,
    cfg: FederationConfig,
    rng: np.random.Generator,
) -> np.ndarray:
    """Local momentum-SGD from the broadcast parameters; returns the
    pseudo-gradient (global - local) / lr. With local_steps=1 and zero
    momentum this is exactly the single minibatch gradient."""
    params = global_params
    velocity = np.zeros(global_params.d)
    for _ in range(cfg.local_steps):
        batch = sample_batch(client, cfg.batch_size, rng)
        grad = backward(params, batch)
        params, velocity = sgd_step(params, grad, cfg.learning_rate, velocity, cfg.momentum)
    return (global_params.values - params.values) / cfg.learning_rate


def aggregate(
    global_params: ModelParams,
    sparse_updates: list[SparseUpdate],
    weights: np.ndarray,
    lr: float,
) -> ModelParams:
    """Server step: w' = w - lr * sum_k p_k * update_k, accumulated sparsely
    in client order."""
    weights = np.asarray(weights, dtype=np.float64)
    if weights.shape != (len(sparse_updates),):
        raise ConfigurationError("one weight per update required")
    acc = np.zeros(global_params.d)
    for update, w in zip(sparse_updates, weights):
        if update.d != global_params.d:
            raise ConfigurationError("update dimension does not match model")
        acc[update.indices] += w * update.values
    return global_params.replace_values(global_params.values - lr * acc)


def evaluate(params: ModelParams, eval_set: Dataset) -> tuple[float, float]:
    """(accuracy, mean loss) over the full evaluation set."""
    loss, logits = forward(params, Batch(eval_set.features, eval_set.labels))
    accuracy = float(np.mean(np.argmax(logits, axis=1) == eval_set.labels))
    return accuracy, loss


def _select_mask(
    method: str,
    update: np.ndarray,
    costs: np.ndarray,
    k: int,
    d: int,
    rng: np.random.Generator,
) -> PruningMask:
    if method == "dense":
        return PruningMask(np.arange(d), d)
    if method == "topk":
        return top_k_mask(update, k)
    if method == "cwmp":
        return cwmp_mask(update, costs, k)
    return random_k_mask(d, k, rng)


def run_federation(
    cfg: FederationConfig,
    train: Dataset,
    eval_set: Dataset,
    mask_log: list | None = None,
) -> list[RoundMetrics]:
    """Run the full protocol for cfg.rounds rounds and return per-round metrics.

    Fully deterministic given cfg.seed. When mask_log is a list, every
    (round, client, mask) triple is appended for external energy audits.
    """
    root = np.random.SeedSequence(cfg.seed)
    part_ss, init_ss, rounds_ss = root.spawn(3)
    clients = partition_dirichlet(train, cfg.num_clients, cfg.dirichlet_alpha, part_ss)
    params = init_params(
        mlp_layers(train.input_dim, [cfg.hidden_dim], train.num_classes), init_ss
    )
    costs = build_cost_vector(params, cfg.classifier_cost, cfg.feature_cost)
    d = params.d
    k = d if cfg.method == "dense" else k_from_fraction(cfg.sparsity_fraction, d)

    if cfg.client_weights is not None:
        weights = np.asarray(cfg.client_weights, dtype=np.float64)
    else:
        counts = np.array([c.n for c in clients], dtype=np.float64)
        weights = counts / counts.sum()

    metrics: list[RoundMetrics] = []
    cumulative = 0.0
    round_seeds = rounds_ss.spawn(cfg.rounds)
    for t in range(1, cfg.rounds + 1):
        client_seeds = round_seeds[t - 1].spawn(cfg.num_clients)
        updates: list[SparseUpdate] = []
        round_energy = 0.0
        for i, client in enumerate(clients):
            rng = np.random.default_rng(client_seeds[i])
            update = client_update(params, client, cfg, rng)
            mask = _select_mask(cfg.method, update, costs, k, d, rng)
            if mask_log is not None:
                mask_log.append((t, i, mask))
            updates.append(apply_mask(update, mask))
            round_energy += energy_of(mask, costs, budget_k=k).energy
        params = aggregate(params, updates, weights, cfg.learning_rate)
        cumulative += round_energy
        accuracy, loss = evaluate(params, eval_set)
        metrics.append(RoundMetrics(t, accuracy, loss, k, round_energy, cumulative))
    return metrics
