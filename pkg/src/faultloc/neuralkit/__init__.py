"""Small numpy neural-network toolkit with explicit backpropagation."""

from .gan import (SaeGanConfig, SaeGanModel, discriminator_step, generate_samples,
                  generator_step, load_saegan, save_saegan, train_saegan)
from .gradcheck import check_net, grad_check
from .layers import (Conv1D, Dense, GlobalAvgPool, MeanPool, ReLU, Sigmoid, Softmax,
                     Tanh)
from .net import (Net, TrainConfig, TrainingDiverged, build_cnn, build_fcn,
                  cross_entropy, mlp, train_classifier)
from .sae import SaeModel, sae_loss, train_sae

__all__ = [
    "Conv1D", "Dense", "GlobalAvgPool", "MeanPool", "Net", "ReLU", "SaeGanConfig",
    "SaeGanModel", "SaeModel", "Sigmoid", "Softmax", "Tanh", "TrainConfig",
    "TrainingDiverged", "build_cnn", "build_fcn", "check_net", "cross_entropy",
    "discriminator_step", "generate_samples", "generator_step", "grad_check",
    "load_saegan", "mlp", "sae_loss", "save_saegan", "train_classifier", "train_sae",
    "train_saegan",
]
