"""
Neighborhoods kept by LLE and by PCA
====================================

A point cloud on a curved sheet: LLE should keep each point's neighbors
together, a linear projection folds distant layers on top of each other.
"""

import numpy as np

from faultloc.lle import LleConfig, lle_reduce, pca_reduce


def roll(n, turns, height, seed=0):
    rng = np.random.default_rng(seed)
    t = rng.uniform(1.5 * np.pi, (1.5 + turns) * np.pi, n)
    h = rng.uniform(0, height, n)
    return np.column_stack([t * np.cos(t), h, t * np.sin(t)])


def overlap(a, b, k=10):
    def nbrs(x):
        d = ((x[:, None] - x[None]) ** 2).sum(-1)
        np.fill_diagonal(d, np.inf)
        return np.argsort(d, axis=1)[:, :k]
    return np.mean([len(set(p) & set(q)) / k for p, q in zip(nbrs(a), nbrs(b))])


for turns, height in [(1.5, 40.0), (3.0, 21.0)]:
    pts = roll(800, turns, height)
    lle_emb = lle_reduce(pts, LleConfig(k_neighbors=10, target_dim=2))
    pca_emb = pca_reduce(pts, 2)
    print(f"{turns} half-turns, height {height:4.0f}: "
          f"LLE overlap {overlap(pts, lle_emb):.3f}  PCA overlap {overlap(pts, pca_emb):.3f}")

# the long roll is unrolled in order but squashed to unit variance per axis,
# which shuffles 10-NN sets along the short side
