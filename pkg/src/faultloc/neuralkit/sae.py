"""Sparse autoencoder with a KL sparsity penalty on mean hidden activation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .net import PROB_EPS, Net, TrainConfig, TrainingDiverged, mlp


@dataclass
class SaeModel:
    encoder: Net
    decoder: Net
    sparsity_target: float = 0.05
    sparsity_weight: float = 0.1
    loss_trace: list = field(default_factory=list)

    def encode(self, x):
        return self.encoder.forward(x)

    def decode(self, h):
        return self.decoder.forward(h)

    def reconstruct(self, x):
        return self.decode(self.encode(x))


def _kl_terms(rho: float, rho_hat):
    rho_hat = np.clip(rho_hat, PROB_EPS, 1.0 - PROB_EPS)
    return rho * np.log(rho / rho_hat) + (1 - rho) * np.log((1 - rho) / (1 - rho_hat)), rho_hat


def sae_loss(x, reconstruction, hidden, rho: float, alpha: float) -> float:
    """Batch-mean half squared reconstruction error plus ``alpha`` times the KL penalty.

    ``hidden`` is the ``(batch, units)`` activation matrix; the KL term compares
    ``rho`` with each unit's batch-mean activation.
    """
    x = np.atleast_2d(x)
    reconstruction = np.atleast_2d(reconstruction)
    hidden = np.atleast_2d(hidden)
    recon = 0.5 * np.sum((reconstruction - x) ** 2) / x.shape[0]
    kl, _ = _kl_terms(rho, hidden.mean(axis=0))
    loss = float(recon + alpha * kl.sum())
    if not np.isfinite(loss):
        raise ValueError("non-finite SAE loss")
    return loss


def sae_loss_grads(x, reconstruction, hidden, rho: float, alpha: float):
    """Gradients of :func:`sae_loss` w.r.t. ``reconstruction`` and ``hidden``."""
    batch = x.shape[0]
    d_recon = (reconstruction - x) / batch
    _, rho_hat = _kl_terms(rho, hidden.mean(axis=0))
    d_rho_hat = alpha * (-rho / rho_hat + (1 - rho) / (1 - rho_hat))
    d_hidden = np.broadcast_to(d_rho_hat / batch, hidden.shape).copy()
    return d_recon, d_hidden


def build_sae(input_dim: int, latent_dim: int = 32, rho: float = 0.05, alpha: float = 0.1,
              seed: int = 0) -> SaeModel:
    rng = np.random.default_rng(seed)
    return SaeModel(mlp([input_dim, latent_dim], output="sigmoid", rng=rng),
                    mlp([latent_dim, input_dim], output="sigmoid", rng=rng),
                    rho, alpha)


def sae_backward(model: SaeModel, x):
    """Forward + backward on one batch; leaves gradients in the nets, returns the loss."""
    h = model.encoder.forward(x)
    y = model.decoder.forward(h)
    loss = sae_loss(x, y, h, model.sparsity_target, model.sparsity_weight)
    d_y, d_h = sae_loss_grads(x, y, h, model.sparsity_target, model.sparsity_weight)
    model.encoder.backward(model.decoder.backward(d_y) + d_h)
    return loss


def full_loss(model: SaeModel, data) -> float:
    h = model.encode(data)
    return sae_loss(data, model.decode(h), h, model.sparsity_target, model.sparsity_weight)


def train_sae(data, cfg: TrainConfig, latent_dim: int = 32, rho: float = 0.05,
              alpha: float = 0.1, model: SaeModel | None = None) -> SaeModel:
    """Minibatch SGD on :func:`sae_loss`.

    ``loss_trace[0]`` is the full-data loss before training, followed by one
    entry per epoch.
    """
    data = np.atleast_2d(np.asarray(data, dtype=np.float64))
    if data.shape[0] == 0:
        raise ValueError("cannot train on an empty dataset")
    if model is None:
        model = build_sae(data.shape[1], latent_dim, rho, alpha, cfg.seed)
    rng = np.random.default_rng(cfg.seed + 1)
    trace = [full_loss(model, data)]
    for epoch in range(cfg.epochs):
        order = rng.permutation(data.shape[0])
        try:
            for start in range(0, len(order), cfg.batch_size):
                sae_backward(model, data[order[start:start + cfg.batch_size]])
                model.encoder.sgd_step(cfg.learning_rate)
                model.decoder.sgd_step(cfg.learning_rate)
            trace.append(full_loss(model, data))
        except (TrainingDiverged, ValueError) as exc:
            raise TrainingDiverged(f"SAE diverged at epoch {epoch}: {exc}") from None
    model.loss_trace = trace
    return model
