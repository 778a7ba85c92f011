"""Layers with hand-written backward passes.

Convolutional tensors are laid out ``(batch, channels, length)``; a 2-D input
to a single-channel ``Conv1D`` is read as ``(batch, length)``. Every layer
caches what its backward pass needs during ``forward``; ``backward`` fills
``self.grads`` (same order as ``self.params``) and returns the input gradient.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


class Layer:
    kind = "Layer"

    def __init__(self):
        self.params: list[np.ndarray] = []
        self.grads: list[np.ndarray] = []

    def forward(self, x):
        raise NotImplementedError

    def backward(self, grad):
        raise NotImplementedError

    def hyper(self) -> list[float]:
        """Non-trainable shape arguments, stored alongside the weights in checkpoints."""
        return []

    def __repr__(self):
        return f"{self.kind}({', '.join(str(h) for h in self.hyper())})"


class Dense(Layer):
    kind = "Dense"

    def __init__(self, n_in: int, n_out: int, rng=None, weights=None, bias=None):
        super().__init__()
        if weights is None:
            rng = rng if rng is not None else np.random.default_rng(0)
            weights = rng.normal(0.0, np.sqrt(2.0 / (n_in + n_out)), size=(n_in, n_out))
        self.W = np.array(weights, dtype=np.float64)
        self.b = np.zeros(n_out) if bias is None else np.array(bias, dtype=np.float64)
        if self.W.shape != (n_in, n_out) or self.b.shape != (n_out,):
            raise ValueError("Dense parameter shapes do not match (n_in, n_out)")
        self.params = [self.W, self.b]
        self.grads = [np.zeros_like(self.W), np.zeros_like(self.b)]

    def hyper(self):
        return list(self.W.shape)

    def forward(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.W.shape[0]:
            raise ValueError(f"Dense expects (batch, {self.W.shape[0]}), got {x.shape}")
        self._x = x
        return x @ self.W + self.b

    def backward(self, grad):
        self.grads[0][...] = self._x.T @ grad
        self.grads[1][...] = grad.sum(axis=0)
        return grad @ self.W.T


class Conv1D(Layer):
    """Valid (unpadded) stride-1 convolution (cross-correlation)."""

    kind = "Conv1D"

    def __init__(self, in_ch: int, out_ch: int, width: int, rng=None, weights=None, bias=None):
        super().__init__()
        if weights is None:
            rng = rng if rng is not None else np.random.default_rng(0)
            weights = rng.normal(0.0, np.sqrt(2.0 / (in_ch * width)), size=(out_ch, in_ch, width))
        self.W = np.array(weights, dtype=np.float64)
        self.b = np.zeros(out_ch) if bias is None else np.array(bias, dtype=np.float64)
        if self.W.shape != (out_ch, in_ch, width) or self.b.shape != (out_ch,):
            raise ValueError("Conv1D parameter shapes do not match (out_ch, in_ch, width)")
        self.params = [self.W, self.b]
        self.grads = [np.zeros_like(self.W), np.zeros_like(self.b)]

    def hyper(self):
        return list(self.W.shape)

    def forward(self, x):
        x = np.asarray(x, dtype=np.float64)
        self._squeezed = x.ndim == 2
        if self._squeezed:
            x = x[:, None, :]
        out_ch, in_ch, width = self.W.shape
        if x.ndim != 3 or x.shape[1] != in_ch:
            raise ValueError(f"Conv1D expects (batch, {in_ch}, length), got {x.shape}")
        if x.shape[2] < width:
            raise ValueError(f"input length {x.shape[2]} shorter than kernel width {width}")
        self._x = x
        batch, _, length = x.shape
        l_out = length - width + 1
        # im2col: (batch * l_out, in_ch * width)
        cols = sliding_window_view(x, width, axis=2).transpose(0, 2, 1, 3)
        self._cols = cols.reshape(batch * l_out, in_ch * width)
        out = self._cols @ self.W.reshape(out_ch, -1).T + self.b
        return out.reshape(batch, l_out, out_ch).transpose(0, 2, 1)

    def backward(self, grad):
        out_ch, in_ch, width = self.W.shape
        batch, _, l_out = grad.shape
        g2 = grad.transpose(0, 2, 1).reshape(batch * l_out, out_ch)
        self.grads[0][...] = (g2.T @ self._cols).reshape(self.W.shape)
        self.grads[1][...] = g2.sum(axis=0)
        dcols = (g2 @ self.W.reshape(out_ch, -1)).reshape(batch, l_out, in_ch, width)
        dx = np.zeros_like(self._x)
        for w in range(width):
            dx[:, :, w:w + l_out] += dcols[:, :, :, w].transpose(0, 2, 1)
        return dx[:, 0, :] if self._squeezed else dx


class MeanPool(Layer):
    """Non-overlapping mean pooling; a trailing remainder is dropped."""

    kind = "MeanPool"

    def __init__(self, size: int = 2):
        super().__init__()
        self.size = int(size)

    def hyper(self):
        return [self.size]

    def forward(self, x):
        b, c, length = x.shape
        n = length // self.size
        if n < 1:
            raise ValueError(f"input length {length} shorter than pool size {self.size}")
        self._shape = x.shape
        return x[:, :, :n * self.size].reshape(b, c, n, self.size).mean(axis=3)

    def backward(self, grad):
        dx = np.zeros(self._shape)
        n = grad.shape[2]
        dx[:, :, :n * self.size] = np.repeat(grad / self.size, self.size, axis=2)
        return dx


class GlobalAvgPool(Layer):
    kind = "GlobalAvgPool"

    def forward(self, x):
        self._shape = x.shape
        return x.mean(axis=2)

    def backward(self, grad):
        return np.broadcast_to(grad[:, :, None] / self._shape[2], self._shape).copy()


class ReLU(Layer):
    kind = "ReLU"

    def forward(self, x):
        self._mask = x > 0
        return np.where(self._mask, x, 0.0)

    def backward(self, grad):
        return grad * self._mask


class Sigmoid(Layer):
    kind = "Sigmoid"

    def forward(self, x):
        # split by sign to avoid overflow in exp
        out = np.empty_like(x, dtype=np.float64)
        pos = x >= 0
        out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
        ex = np.exp(x[~pos])
        out[~pos] = ex / (1.0 + ex)
        self._y = out
        return out

    def backward(self, grad):
        return grad * self._y * (1.0 - self._y)


class Tanh(Layer):
    kind = "Tanh"

    def forward(self, x):
        self._y = np.tanh(x)
        return self._y

    def backward(self, grad):
        return grad * (1.0 - self._y ** 2)


class Softmax(Layer):
    """Row-wise softmax over the last axis."""

    kind = "Softmax"

    def forward(self, x):
        z = x - x.max(axis=-1, keepdims=True)
        e = np.exp(z)
        self._y = e / e.sum(axis=-1, keepdims=True)
        return self._y

    def backward(self, grad):
        y = self._y
        return y * (grad - (grad * y).sum(axis=-1, keepdims=True))


LAYER_KINDS = {cls.kind: cls for cls in
               (Dense, Conv1D, MeanPool, GlobalAvgPool, ReLU, Sigmoid, Tanh, Softmax)}


def layer_from_record(kind: str, hyper, tensors) -> Layer:
    """Rebuild a layer from its checkpoint record."""
    hyper = [int(h) for h in hyper]
    if kind == "Dense":
        return Dense(hyper[0], hyper[1], weights=tensors[0], bias=tensors[1])
    if kind == "Conv1D":
        out_ch, in_ch, width = hyper
        return Conv1D(in_ch, out_ch, width, weights=tensors[0], bias=tensors[1])
    if kind == "MeanPool":
        return MeanPool(hyper[0])
    try:
        return LAYER_KINDS[kind]()
    except KeyError:
        raise ValueError(f"unknown layer kind {kind!r}") from None
