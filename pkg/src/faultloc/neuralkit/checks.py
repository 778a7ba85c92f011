"""Finite-difference checks of every differentiable piece of the toolkit."""

from __future__ import annotations

import numpy as np

from .gan import (SaeGanConfig, build_saegan, discriminator_grads, discriminator_objective,
                  generator_grads, generator_objective, sample_noise)
from .gradcheck import check_net, grad_check
from .layers import Conv1D, Dense, GlobalAvgPool, MeanPool, ReLU, Sigmoid, Softmax, Tanh
from .net import Net, build_cnn, build_fcn, cross_entropy, cross_entropy_grad
from .sae import build_sae, sae_backward, full_loss

TOLERANCE = 1e-4


def _weighted_sum(rng, shape):
    # a fixed random linear readout makes every output element matter
    weights = rng.normal(size=shape)
    return lambda out: (float(np.sum(weights * out)), weights)


def _layer_cases(rng):
    yield "Dense", Net([Dense(5, 4, rng)]), rng.normal(size=(3, 5))
    yield "Conv1D", Net([Conv1D(2, 3, 4, rng)]), rng.normal(size=(2, 2, 11))
    yield "MeanPool", Net([MeanPool(2)]), rng.normal(size=(2, 3, 9))
    yield "GlobalAvgPool", Net([GlobalAvgPool()]), rng.normal(size=(2, 3, 7))
    # keep ReLU inputs away from the kink
    x = rng.normal(size=(4, 6))
    yield "ReLU", Net([ReLU()]), np.where(np.abs(x) < 0.05, 0.5, x)
    yield "Sigmoid", Net([Sigmoid()]), rng.normal(size=(4, 6)) * 3
    yield "Tanh", Net([Tanh()]), rng.normal(size=(4, 6))
    yield "Softmax", Net([Softmax()]), rng.normal(size=(4, 6))


def _ce_check(builder, rng, length=40, k=8, batch=4):
    net = builder(length, k, rng)
    x = rng.uniform(0, 1, size=(batch, length))
    labels = rng.integers(0, k, size=batch)
    return check_net(net, x, lambda p: (cross_entropy(p, labels), cross_entropy_grad(p, labels)),
                     max_per_array=30)


def _sae_check(rng):
    model = build_sae(12, 6, rho=0.1, alpha=0.3, seed=int(rng.integers(1 << 30)))
    x = rng.uniform(0, 1, size=(5, 12))
    sae_backward(model, x)
    nets = [model.encoder, model.decoder]
    params = [p for n in nets for p in n.params()]
    grads = [g.copy() for n in nets for g in n.grads()]
    return grad_check(lambda: full_loss(model, x), params, grads)


def _gan_checks(rng):
    cfg = SaeGanConfig(latent_dim=4, core_hidden=6, disc_hidden=5)
    sae = build_sae(10, 4, seed=int(rng.integers(1 << 30)))
    model = build_saegan(sae, cfg, rng)
    real = rng.uniform(0, 1, size=(4, 10))
    z = sample_noise(rng, 3, 4)

    discriminator_grads(model, real, z)
    d_params = model.discriminator.params()
    # the stored grads are of -L_D (descent form); compare against -L_D numerically
    d_grads = [g.copy() for g in model.discriminator.grads()]

    def neg_d():
        return -discriminator_objective(model.discriminate(real), model.discriminate(model.generate(z)))

    d_err = grad_check(neg_d, d_params, d_grads)

    generator_grads(model, z)
    g_params = model.generator_core.params() + model.sae.decoder.params()
    g_grads = [g.copy() for g in model.generator_core.grads() + model.sae.decoder.grads()]
    g_err = grad_check(lambda: generator_objective(model.discriminate(model.generate(z))),
                       g_params, g_grads)
    return d_err, g_err


def run_all(seed: int = 0) -> dict[str, float]:
    """Max relative error per checked component."""
    rng = np.random.default_rng(seed)
    results = {}
    for name, net, x in _layer_cases(rng):
        out = net.forward(x)
        results[f"layer:{name}"] = check_net(net, x, _weighted_sum(rng, out.shape))
    results["sae_loss"] = _sae_check(rng)
    results["gan_discriminator"], results["gan_generator"] = _gan_checks(rng)
    results["cross_entropy:cnn"] = _ce_check(build_cnn, rng)
    results["cross_entropy:fcn"] = _ce_check(build_fcn, rng)
    return results
