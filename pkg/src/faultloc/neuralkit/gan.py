"""GAN whose generator runs in the latent space of a pretrained sparse autoencoder.

Generated samples are ``decoder(core(z))`` with ``z ~ U(-1, 1)`` of latent
dimension. The discriminator sees data-space vectors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import checkpoint
from .net import PROB_EPS, Net, TrainConfig, TrainingDiverged, mlp
from .sae import SaeModel, train_sae


@dataclass(frozen=True)
class SaeGanConfig:
    latent_dim: int = 32
    core_hidden: int = 64
    disc_hidden: int = 64
    sparsity_target: float = 0.05
    sparsity_weight: float = 0.1
    sae_train: TrainConfig = TrainConfig(learning_rate=0.5, epochs=300, batch_size=8, seed=0)
    gan_train: TrainConfig = TrainConfig(learning_rate=0.05, epochs=200, batch_size=8, seed=0)
    freeze_sae: bool = True


@dataclass
class SaeGanModel:
    sae: SaeModel
    generator_core: Net
    discriminator: Net
    freeze_sae: bool = True
    d_trace: list = field(default_factory=list)
    g_trace: list = field(default_factory=list)

    @property
    def latent_dim(self) -> int:
        return self.generator_core.layers[0].W.shape[0]

    def generate(self, z):
        return self.sae.decode(self.generator_core.forward(z))

    def discriminate(self, x):
        return self.discriminator.forward(x)[:, 0]


def sample_noise(rng, count: int, dim: int) -> np.ndarray:
    return rng.uniform(-1.0, 1.0, size=(count, dim))


def _clamp(p):
    return np.clip(p, PROB_EPS, 1.0 - PROB_EPS)


def discriminator_objective(p_real, p_fake) -> float:
    """``mean log D(x) + mean log(1 - D(G(z)))``, to be maximized."""
    return float(np.mean(np.log(_clamp(p_real))) + np.mean(np.log(1.0 - _clamp(p_fake))))


def generator_objective(p_fake) -> float:
    """``mean log(1 - D(G(z)))``, to be minimized."""
    return float(np.mean(np.log(1.0 - _clamp(p_fake))))


def _d_log(p):
    # derivative of log(clamp(p)); zero where the clamp is active
    inside = (p > PROB_EPS) & (p < 1.0 - PROB_EPS)
    return np.where(inside, 1.0 / _clamp(p), 0.0)


def _d_log1m(p):
    inside = (p > PROB_EPS) & (p < 1.0 - PROB_EPS)
    return np.where(inside, -1.0 / (1.0 - _clamp(p)), 0.0)


def discriminator_grads(model: SaeGanModel, real, z):
    """Fill discriminator grads with d(-L_D)/d(theta_D); returns L_D."""
    fake = model.generate(z)
    batch = np.vstack([real, fake])
    p = model.discriminator.forward(batch)[:, 0]
    n_real = real.shape[0]
    p_real, p_fake = p[:n_real], p[n_real:]
    value = discriminator_objective(p_real, p_fake)
    g = np.concatenate([_d_log(p_real) / n_real, _d_log1m(p_fake) / len(p_fake)])
    model.discriminator.backward(-g[:, None])
    return value


def generator_grads(model: SaeGanModel, z):
    """Fill generator-core (and decoder) grads with dL_G/d(theta); returns L_G."""
    code = model.generator_core.forward(z)
    fake = model.sae.decoder.forward(code)
    p = model.discriminator.forward(fake)[:, 0]
    value = generator_objective(p)
    g = _d_log1m(p) / len(p)
    d_fake = model.discriminator.backward(g[:, None])
    d_code = model.sae.decoder.backward(d_fake)
    model.generator_core.backward(d_code)
    return value


def discriminator_step(model: SaeGanModel, real_batch, noise_batch, cfg: TrainConfig) -> float:
    """One gradient-ascent step on the discriminator only; returns L_D before the step."""
    real_batch = np.atleast_2d(real_batch)
    noise_batch = np.atleast_2d(noise_batch)
    if real_batch.shape[0] == 0 or noise_batch.shape[0] == 0:
        raise ValueError("empty batch")
    value = discriminator_grads(model, real_batch, noise_batch)
    if not np.isfinite(value):
        raise TrainingDiverged("non-finite discriminator objective")
    model.discriminator.sgd_step(cfg.learning_rate)
    return value


def generator_step(model: SaeGanModel, noise_batch, cfg: TrainConfig) -> float:
    """One gradient-descent step on the generator core; returns L_G before the step.

    The SAE decoder is updated too only when ``model.freeze_sae`` is False.
    """
    noise_batch = np.atleast_2d(noise_batch)
    if noise_batch.shape[0] == 0:
        raise ValueError("empty batch")
    value = generator_grads(model, noise_batch)
    if not np.isfinite(value):
        raise TrainingDiverged("non-finite generator objective")
    model.generator_core.sgd_step(cfg.learning_rate)
    if not model.freeze_sae:
        model.sae.decoder.sgd_step(cfg.learning_rate)
    return value


def build_saegan(sae: SaeModel, cfg: SaeGanConfig, rng) -> SaeGanModel:
    latent = sae.encoder.layers[0].W.shape[1]
    input_dim = sae.encoder.layers[0].W.shape[0]
    core = mlp([latent, cfg.core_hidden, latent], hidden="relu", output="sigmoid", rng=rng)
    disc = mlp([input_dim, cfg.disc_hidden, 1], hidden="relu", output="sigmoid", rng=rng)
    return SaeGanModel(sae, core, disc, cfg.freeze_sae)


def train_saegan(real_data, cfg: SaeGanConfig | None = None) -> SaeGanModel:
    """Pretrain an SAE on ``real_data`` (one fault class), then alternate D and G steps."""
    cfg = cfg or SaeGanConfig()
    real = np.atleast_2d(np.asarray(real_data, dtype=np.float64))
    if real.shape[0] < 2:
        raise ValueError("need at least 2 real samples")
    sae = train_sae(real, cfg.sae_train, cfg.latent_dim, cfg.sparsity_target, cfg.sparsity_weight)
    gt = cfg.gan_train
    rng = np.random.default_rng([gt.seed, 7])
    model = build_saegan(sae, cfg, rng)
    for epoch in range(gt.epochs):
        order = rng.permutation(real.shape[0])
        for start in range(0, len(order), gt.batch_size):
            batch = real[order[start:start + gt.batch_size]]
            try:
                d_val = discriminator_step(model, batch, sample_noise(rng, len(batch), cfg.latent_dim), gt)
                g_val = generator_step(model, sample_noise(rng, len(batch), cfg.latent_dim), gt)
            except TrainingDiverged as exc:
                raise TrainingDiverged(
                    f"SAE-GAN diverged at epoch {epoch} (last D {model.d_trace[-1:]}, "
                    f"last G {model.g_trace[-1:]}): {exc}") from None
        model.d_trace.append(d_val)
        model.g_trace.append(g_val)
    return model


def generate_samples(model: SaeGanModel, count: int, seed: int) -> np.ndarray:
    """``count`` generated samples clipped to the normalized range [0, 1]."""
    rng = np.random.default_rng(seed)
    input_dim = model.discriminator.layers[0].W.shape[0]
    if count <= 0:
        return np.zeros((0, input_dim))
    return np.clip(model.generate(sample_noise(rng, count, model.latent_dim)), 0.0, 1.0)


def save_saegan(model: SaeGanModel, path) -> None:
    checkpoint.save(path, {"encoder": model.sae.encoder, "decoder": model.sae.decoder,
                           "generator_core": model.generator_core,
                           "discriminator": model.discriminator},
                    {"sparsity": [model.sae.sparsity_target, model.sae.sparsity_weight],
                     "freeze_sae": [float(model.freeze_sae)]})


def load_saegan(path) -> SaeGanModel:
    nets, extras = checkpoint.load(path)
    rho, alpha = extras["sparsity"]
    sae = SaeModel(nets["encoder"], nets["decoder"], float(rho), float(alpha))
    return SaeGanModel(sae, nets["generator_core"], nets["discriminator"],
                       bool(extras["freeze_sae"][0]))
