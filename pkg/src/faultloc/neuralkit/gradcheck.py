"""Central-difference gradient checking."""

from __future__ import annotations

import numpy as np


def relative_error(analytic, numeric) -> np.ndarray:
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    return np.abs(analytic - numeric) / np.maximum(1e-8, np.abs(analytic) + np.abs(numeric))


def numeric_grad(loss_fn, array: np.ndarray, h: float = 1e-5, index=None) -> np.ndarray:
    """Central differences of ``loss_fn()`` w.r.t. entries of ``array`` (perturbed in place).

    ``index`` restricts the check to a subset of flat positions; other entries
    are returned as NaN.
    """
    grad = np.full(array.shape, np.nan)
    positions = range(array.size) if index is None else index
    flat = array.reshape(-1)
    for i in positions:
        old = flat[i]
        flat[i] = old + h
        up = loss_fn()
        flat[i] = old - h
        down = loss_fn()
        flat[i] = old
        grad.flat[i] = (up - down) / (2 * h)
    return grad


def grad_check(loss_fn, arrays, analytic_grads, h: float = 1e-5,
               max_per_array: int | None = None, seed: int = 0) -> float:
    """Max relative error between analytic and central-difference gradients.

    ``loss_fn`` must read the current contents of ``arrays``. With
    ``max_per_array`` only a seeded random subset of each array is probed.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for arr, g in zip(arrays, analytic_grads):
        index = None
        if max_per_array is not None and arr.size > max_per_array:
            index = np.sort(rng.choice(arr.size, max_per_array, replace=False))
        num = numeric_grad(loss_fn, arr, h, index)
        mask = ~np.isnan(num)
        if mask.any():
            worst = max(worst, float(relative_error(np.asarray(g)[mask], num[mask]).max()))
    return worst


def check_net(net, x, loss_and_grad, h: float = 1e-5, max_per_array: int | None = None,
              seed: int = 0) -> float:
    """Gradient check of every parameter and the input of ``net``.

    ``loss_and_grad(output) -> (loss, d loss / d output)``.
    """
    x = np.array(x, dtype=np.float64)
    out = net.forward(x)
    _, g_out = loss_and_grad(out)
    dx = net.backward(g_out)
    analytic = [g.copy() for g in net.grads()] + [dx]

    def loss():
        return loss_and_grad(net.forward(x))[0]

    return grad_check(loss, net.params() + [x], analytic, h, max_per_array, seed)
