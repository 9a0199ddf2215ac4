"""Datasets for the desk-scale federation: synthetic Gaussian mixture,
Dirichlet non-IID partitioning, and labeled-CSV ingestion.

CSV convention: a header row; every column except the label column is a
feature (file order preserved); the label column holds integer class ids.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError


@dataclass
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    num_classes: int

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.features.ndim != 2 or self.labels.shape != (self.features.shape[0],):
            raise ConfigurationError("features must be (n, p) with matching 1-D labels")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.num_classes):
            raise ConfigurationError("labels out of range [0, num_classes)")

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def input_dim(self) -> int:
        return self.features.shape[1]

    def label_histogram(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.num_classes)


@dataclass
class ClientDataset(Dataset):
    """One client's shard; indices point back into the parent dataset."""

    indices: np.ndarray = None

    def __post_init__(self):
        super().__post_init__()
        self.indices = np.asarray(self.indices, dtype=np.int64)
        if self.indices.shape != (self.n,):
            raise ConfigurationError("client indices must match shard size")


def make_synthetic_task(
    n_train: int = 8000,
    n_eval: int = 2000,
    num_classes: int = 8,
    input_dim: int = 32,
    seed: int = 0,
    class_sep: float = 0.65,
) -> tuple[Dataset, Dataset]:
    """Gaussian-mixture classification task: one unit-noise cluster per class,
    class means drawn once at scale class_sep. Train and eval share the mixture."""
    if n_train < 1 or n_eval < 1 or num_classes < 2 or input_dim < 1:
        raise ConfigurationError("invalid synthetic task sizes")
    means_ss, train_ss, eval_ss = np.random.SeedSequence(seed).spawn(3)
    means = np.random.default_rng(means_ss).normal(0.0, 1.0, (num_classes, input_dim)) * class_sep

    def draw(ss, n):
        rng = np.random.default_rng(ss)
        labels = rng.integers(0, num_classes, n)
        features = means[labels] + rng.normal(0.0, 1.0, (n, input_dim))
        return Dataset(features, labels, num_classes)

    return draw(train_ss, n_train), draw(eval_ss, n_eval)


def partition_dirichlet(dataset: Dataset, num_clients: int, alpha: float, seed) -> list[ClientDataset]:
    """Split a dataset into num_clients disjoint shards; per class, client
    proportions are drawn from Dirichlet(alpha * 1). Clients left empty by the
    draw are repaired with one sample moved from the largest client."""
    if alpha <= 0:
        raise ConfigurationError(f"alpha must be > 0, got {alpha}")
    if num_clients < 1:
        raise ConfigurationError("num_clients must be >= 1")
    if dataset.n < num_clients:
        raise ConfigurationError(
            f"cannot partition {dataset.n} samples across {num_clients} clients"
        )
    rng = np.random.default_rng(seed)
    shards: list[list[np.ndarray]] = [[] for _ in range(num_clients)]
    for c in range(dataset.num_classes):
        idx = np.flatnonzero(dataset.labels == c)
        if idx.size == 0:
            continue
        rng.shuffle(idx)
        props = rng.dirichlet(np.full(num_clients, alpha))
        cuts = (np.cumsum(props)[:-1] * idx.size).astype(np.int64)
        for shard, part in zip(shards, np.split(idx, cuts)):
            shard.append(part)

    index_sets = [
        np.sort(np.concatenate(parts)) if parts else np.empty(0, dtype=np.int64)
        for parts in shards
    ]
    for i in range(num_clients):
        while index_sets[i].size == 0:
            donor = int(np.argmax([s.size for s in index_sets]))
            if index_sets[donor].size <= 1:
                raise ConfigurationError("cannot repair empty client: no donor has spare samples")
            index_sets[i] = index_sets[donor][-1:]
            index_sets[donor] = index_sets[donor][:-1]

    return [
        ClientDataset(dataset.features[idx], dataset.labels[idx], dataset.num_classes, indices=idx)
        for idx in index_sets
    ]


def load_csv_dataset(path, label_column: str = "label", num_classes: int | None = None) -> Dataset:
    """Read a labeled CSV (header row, integer labels in label_column)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ConfigurationError(f"{path}: empty CSV") from None
        if label_column not in header:
            raise ConfigurationError(f"{path}: missing label column {label_column!r}")
        label_pos = header.index(label_column)
        features = []
        labels = []
        for row_num, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ConfigurationError(f"{path}: row {row_num} has {len(row)} fields")
            try:
                labels.append(int(row[label_pos]))
                features.append([float(v) for j, v in enumerate(row) if j != label_pos])
            except ValueError as exc:
                raise ConfigurationError(f"{path}: row {row_num}: {exc}") from None
    if not features:
        raise ConfigurationError(f"{path}: no data rows")
    labels = np.asarray(labels, dtype=np.int64)
    if labels.min() < 0:
        raise ConfigurationError(f"{path}: negative class label")
    return Dataset(
        np.asarray(features), labels, num_classes if num_classes else int(labels.max()) + 1
    )


def save_csv_dataset(dataset: Dataset, path, label_column: str = "label") -> None:
    """Write a dataset in the load_csv_dataset convention (features f0..fN, label last)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"f{j}" for j in range(dataset.input_dim)] + [label_column])
        for x, y in zip(dataset.features, dataset.labels):
            writer.writerow([repr(float(v)) for v in x] + [int(y)])
