"""
Boosting CNN+FCN weak learners on a toy problem
===============================================

Each class is a noisy sinusoid of its own frequency; the classes are skewed
so that the category weights have something to correct.
"""

import numpy as np

from faultloc.boosting import BoostConfig, CategoryWeightMode, train_adaboost
from faultloc.neuralkit import TrainConfig

rng = np.random.default_rng(1)
k, length = 4, 64
counts = [160, 80, 48, 32]
t = np.arange(length)
x = np.vstack([np.sin(2 * np.pi * (c + 2) * t / length + rng.uniform(0, 2 * np.pi, (n, 1)))
               + rng.normal(0, 0.3, (n, length)) for c, n in enumerate(counts)])
x = (x - x.min()) / (x.max() - x.min())
y = np.repeat(np.arange(k), counts)
print("class counts", np.bincount(y))

# category weights re-applied after every update compound round after round;
# applying them once at the start keeps the majority class in play
for mode in (CategoryWeightMode.EVERY_ROUND, CategoryWeightMode.INIT_ONLY):
    cfg = BoostConfig(rounds=5, weak=TrainConfig(0.2, 15, 16, 0), category_weights=mode)
    ens = train_adaboost(x, y, cfg, k)
    print(f"\n{mode.value}")
    print("round  error   alpha    Z")
    for o, (err, alpha, z) in enumerate(zip(ens.errors, ens.alphas, ens.z_factors)):
        print(f"{o:5d}  {err:.3f}  {alpha:6.3f}  {z:.3f}")
    print(f"training error {ens.training_error:.3f}, product of Z {ens.error_bound:.3f}")
