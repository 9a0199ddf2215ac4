"""Minimal MLP with explicit forward/backward passes on a flat parameter vector.

All parameters live in one float64 vector so that masks, cost vectors and
sparse updates can address the model by flat index. Flattening order is
layer-major: for each layer, the weight matrix W (shape in_dim x out_dim,
row-major) followed by the bias vector, layers in network order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError

ACTIVATIONS = ("relu", "linear")


@dataclass(frozen=True)
class LayerSpec:
    in_dim: int
    out_dim: int
    activation: str = "linear"

    def __post_init__(self):
        if self.in_dim < 1 or self.out_dim < 1:
            raise ConfigurationError(f"layer dims must be >= 1, got {self.in_dim}x{self.out_dim}")
        if self.activation not in ACTIVATIONS:
            raise ConfigurationError(f"unknown activation {self.activation!r}")

    @property
    def size(self) -> int:
        return self.in_dim * self.out_dim + self.out_dim


@dataclass
class ModelParams:
    """Network architecture plus its flat float64 parameter vector."""

    layers: tuple[LayerSpec, ...]
    values: np.ndarray

    def __post_init__(self):
        for prev, cur in zip(self.layers, self.layers[1:]):
            if prev.out_dim != cur.in_dim:
                raise ConfigurationError(
                    f"layer dims do not chain: {prev.out_dim} -> {cur.in_dim}"
                )
        self.values = np.asarray(self.values, dtype=np.float64)
        expected = sum(layer.size for layer in self.layers)
        if self.values.shape != (expected,):
            raise ConfigurationError(
                f"flat vector has shape {self.values.shape}, expected ({expected},)"
            )

    @property
    def d(self) -> int:
        return self.values.size

    @property
    def num_classes(self) -> int:
        return self.layers[-1].out_dim

    @property
    def input_dim(self) -> int:
        return self.layers[0].in_dim

    def layer_slices(self) -> list[slice]:
        """Flat-index slice of each layer, in flattening order."""
        slices = []
        start = 0
        for layer in self.layers:
            slices.append(slice(start, start + layer.size))
            start += layer.size
        return slices

    def layer_of(self) -> np.ndarray:
        """Layer id for every flat index (total map over 0..d-1)."""
        out = np.empty(self.d, dtype=np.int64)
        for i, sl in enumerate(self.layer_slices()):
            out[sl] = i
        return out

    def unflatten(self) -> list[tuple[np.ndarray, np.ndarray]]:
        """Per-layer (W, b) views; W has shape (in_dim, out_dim)."""
        out = []
        for layer, sl in zip(self.layers, self.layer_slices()):
            block = self.values[sl]
            w = block[: layer.in_dim * layer.out_dim].reshape(layer.in_dim, layer.out_dim)
            b = block[layer.in_dim * layer.out_dim :]
            out.append((w, b))
        return out

    def replace_values(self, values: np.ndarray) -> "ModelParams":
        return ModelParams(self.layers, values)


def flatten(layers: tuple[LayerSpec, ...], blocks: list[tuple[np.ndarray, np.ndarray]]) -> np.ndarray:
    """Inverse of ModelParams.unflatten."""
    parts = []
    for layer, (w, b) in zip(layers, blocks):
        if w.shape != (layer.in_dim, layer.out_dim) or b.shape != (layer.out_dim,):
            raise ConfigurationError("block shapes do not match layer spec")
        parts.append(np.asarray(w, dtype=np.float64).reshape(-1))
        parts.append(np.asarray(b, dtype=np.float64))
    return np.concatenate(parts)


@dataclass
class Batch:
    inputs: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        self.inputs = np.asarray(self.inputs, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.inputs.ndim != 2:
            raise ConfigurationError("batch inputs must be 2-D (batch x features)")
        if self.labels.shape != (self.inputs.shape[0],):
            raise ConfigurationError("labels must be 1-D and match the batch size")

    @property
    def size(self) -> int:
        return self.inputs.shape[0]


def mlp_layers(input_dim: int, hidden_dims: list[int], num_classes: int) -> tuple[LayerSpec, ...]:
    """Hidden layers with ReLU, linear output layer (softmax lives in the loss)."""
    dims = [input_dim] + list(hidden_dims) + [num_classes]
    layers = []
    for i, (a, b) in enumerate(zip(dims, dims[1:])):
        act = "linear" if i == len(dims) - 2 else "relu"
        layers.append(LayerSpec(a, b, act))
    return tuple(layers)


def init_params(layers: tuple[LayerSpec, ...], seed) -> ModelParams:
    """Uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) per layer, seeded."""
    rng = np.random.default_rng(seed)
    blocks = []
    for layer in layers:
        bound = 1.0 / np.sqrt(layer.in_dim)
        w = rng.uniform(-bound, bound, size=(layer.in_dim, layer.out_dim))
        b = rng.uniform(-bound, bound, size=layer.out_dim)
        blocks.append((w, b))
    return ModelParams(tuple(layers), flatten(tuple(layers), blocks))


def _check_batch(params: ModelParams, batch: Batch) -> None:
    if batch.size == 0:
        raise ValueError("batch is empty")
    if batch.inputs.shape[1] != params.input_dim:
        raise ConfigurationError(
            f"batch feature dim {batch.inputs.shape[1]} != model input dim {params.input_dim}"
        )
    if batch.labels.min() < 0 or batch.labels.max() >= params.num_classes:
        raise ValueError("labels out of range for the model's class count")


def _activations(params: ModelParams, batch: Batch) -> list[np.ndarray]:
    """Pre-activation z of every layer; entry -1 is the logits."""
    zs = []
    h = batch.inputs
    for layer, (w, b) in zip(params.layers, params.unflatten()):
        z = h @ w + b
        zs.append(z)
        h = np.maximum(z, 0.0) if layer.activation == "relu" else z
    return zs


def forward(params: ModelParams, batch: Batch) -> tuple[float, np.ndarray]:
    """Mean cross-entropy loss and logits for a batch."""
    _check_batch(params, batch)
    logits = _activations(params, batch)[-1]
    shifted = logits - logits.max(axis=1, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=1))
    picked = shifted[np.arange(batch.size), batch.labels]
    loss = float(np.mean(lse - picked))
    return loss, logits


def backward(params: ModelParams, batch: Batch) -> np.ndarray:
    """Gradient of the mean batch loss with respect to the flat parameters."""
    _check_batch(params, batch)
    zs = _activations(params, batch)
    logits = zs[-1]
    shifted = logits - logits.max(axis=1, keepdims=True)
    expz = np.exp(shifted)
    probs = expz / expz.sum(axis=1, keepdims=True)
    delta = probs
    delta[np.arange(batch.size), batch.labels] -= 1.0
    delta /= batch.size

    blocks = params.unflatten()
    grads: list[tuple[np.ndarray, np.ndarray]] = [None] * len(params.layers)
    for i in range(len(params.layers) - 1, -1, -1):
        if i == 0:
            h_prev = batch.inputs
        else:
            prev = params.layers[i - 1]
            h_prev = np.maximum(zs[i - 1], 0.0) if prev.activation == "relu" else zs[i - 1]
        gw = h_prev.T @ delta
        gb = delta.sum(axis=0)
        grads[i] = (gw, gb)
        if i > 0:
            delta = delta @ blocks[i][0].T
            if params.layers[i - 1].activation == "relu":
                delta = delta * (zs[i - 1] > 0.0)
    return flatten(params.layers, grads)


def sgd_step(
    params: ModelParams,
    grad: np.ndarray,
    lr: float,
    momentum_state: np.ndarray,
    momentum: float,
) -> tuple[ModelParams, np.ndarray]:
    """One classical momentum-SGD step; returns (new params, new momentum buffer)."""
    if lr <= 0:
        raise ConfigurationError(f"lr must be > 0, got {lr}")
    if not 0.0 <= momentum < 1.0:
        raise ConfigurationError(f"momentum must be in [0, 1), got {momentum}")
    grad = np.asarray(grad, dtype=np.float64)
    momentum_state = np.asarray(momentum_state, dtype=np.float64)
    if grad.shape != params.values.shape or momentum_state.shape != params.values.shape:
        raise ConfigurationError("gradient / momentum shape does not match parameters")
    velocity = momentum * momentum_state + grad
    return params.replace_values(params.values - lr * velocity), velocity
