"""Sequential networks, SGD and softmax cross-entropy training."""

from __future__ import annotations

import copy
from dataclasses import dataclass

import numpy as np

from .layers import Conv1D, Dense, GlobalAvgPool, Layer, MeanPool, ReLU, Sigmoid, Softmax, Tanh

PROB_EPS = 1e-7


class TrainingDiverged(RuntimeError):
    """Raised when a loss or parameter becomes non-finite."""


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.05
    epochs: int = 20
    batch_size: int = 32
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0 or self.epochs < 1 or self.batch_size < 1:
            raise ValueError("learning_rate, epochs and batch_size must be positive")


class Net:
    """An ordered stack of layers."""

    def __init__(self, layers):
        self.layers: list[Layer] = list(layers)

    def forward(self, x):
        for layer in self.layers:
            x = layer.forward(x)
        return x

    __call__ = forward

    def backward(self, grad):
        """Backpropagate ``grad`` (d loss / d output); returns d loss / d input."""
        for layer in reversed(self.layers):
            grad = layer.backward(grad)
        return grad

    def params(self) -> list[np.ndarray]:
        return [p for layer in self.layers for p in layer.params]

    def grads(self) -> list[np.ndarray]:
        return [g for layer in self.layers for g in layer.grads]

    def sgd_step(self, lr: float) -> None:
        for p, g in zip(self.params(), self.grads()):
            p -= lr * g
        if not all(np.all(np.isfinite(p)) for p in self.params()):
            raise TrainingDiverged("non-finite parameter after SGD step")

    def copy(self) -> "Net":
        return copy.deepcopy(self)

    def checksum(self) -> float:
        return float(sum(np.sum(p * (i + 1)) for i, p in enumerate(self.params())))

    def __eq__(self, other):
        if not isinstance(other, Net) or len(self.layers) != len(other.layers):
            return False
        return all(a.kind == b.kind and a.hyper() == b.hyper()
                   and all(np.array_equal(p, q) for p, q in zip(a.params, b.params))
                   for a, b in zip(self.layers, other.layers))

    def __repr__(self):
        return "Net(" + " -> ".join(map(repr, self.layers)) + ")"


def mlp(sizes, hidden="relu", output="sigmoid", rng=None) -> Net:
    """Dense stack ``sizes[0] -> ... -> sizes[-1]``."""
    act = {"relu": ReLU, "sigmoid": Sigmoid, "tanh": Tanh, "softmax": Softmax}
    layers = []
    for i, (a, b) in enumerate(zip(sizes[:-1], sizes[1:])):
        layers.append(Dense(a, b, rng))
        last = i == len(sizes) - 2
        name = output if last else hidden
        if name is not None:
            layers.append(act[name]())
    return Net(layers)


def build_cnn(input_len: int, num_classes: int, rng) -> Net:
    """Conv(8,5) -> ReLU -> pool(2) -> Conv(16,5) -> ReLU -> GAP -> Dense -> softmax."""
    if (input_len - 4) // 2 < 5:
        raise ValueError(f"input length {input_len} too short for the CNN weak learner")
    return Net([
        Conv1D(1, 8, 5, rng), ReLU(), MeanPool(2),
        Conv1D(8, 16, 5, rng), ReLU(), GlobalAvgPool(),
        Dense(16, num_classes, rng), Softmax(),
    ])


def build_fcn(input_len: int, num_classes: int, rng) -> Net:
    """Three-block fully convolutional net with a global-average-pool head."""
    if input_len < 8 + 4 + 2:
        raise ValueError(f"input length {input_len} too short for the FCN weak learner")
    return Net([
        Conv1D(1, 16, 8, rng), ReLU(),
        Conv1D(16, 32, 5, rng), ReLU(),
        Conv1D(32, 16, 3, rng), ReLU(),
        GlobalAvgPool(), Dense(16, num_classes, rng), Softmax(),
    ])


def cross_entropy(probs, labels) -> float:
    """Mean negative log-likelihood of integer ``labels`` under ``probs``."""
    p = np.clip(probs[np.arange(len(labels)), labels], PROB_EPS, 1.0)
    return float(-np.mean(np.log(p)))


def cross_entropy_grad(probs, labels) -> np.ndarray:
    """Gradient of :func:`cross_entropy` w.r.t. ``probs``."""
    rows = np.arange(len(labels))
    grad = np.zeros_like(probs)
    p = probs[rows, labels]
    grad[rows, labels] = np.where(p > PROB_EPS, -1.0 / np.maximum(p, PROB_EPS), 0.0) / len(labels)
    return grad


def train_classifier(net: Net, x, labels, cfg: TrainConfig) -> list[float]:
    """Minibatch SGD on softmax cross-entropy; returns the per-epoch mean batch loss."""
    rng = np.random.default_rng(cfg.seed)
    x = np.asarray(x, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    trace = []
    for epoch in range(cfg.epochs):
        order = rng.permutation(len(labels))
        losses = []
        for start in range(0, len(order), cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            probs = net.forward(x[idx])
            loss = cross_entropy(probs, labels[idx])
            if not np.isfinite(loss):
                raise TrainingDiverged(f"non-finite cross-entropy at epoch {epoch}")
            net.backward(cross_entropy_grad(probs, labels[idx]))
            net.sgd_step(cfg.learning_rate)
            losses.append(loss)
        trace.append(float(np.mean(losses)))
    return trace
