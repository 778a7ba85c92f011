"""Locally linear embedding (dense eigen-solver) and a PCA baseline."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.spatial.distance import cdist

# above this condition number the local Gram matrix is treated as rank-deficient
_COND_LIMIT = 1e8


@dataclass(frozen=True)
class LleConfig:
    k_neighbors: int = 10
    target_dim: int = 24
    reg_scale: float = 1e-3

    def validate(self, n_points: int, input_dim: int) -> None:
        if not 1 <= self.k_neighbors < n_points:
            raise ValueError(f"k_neighbors={self.k_neighbors} needs 1 <= K < {n_points} points")
        if not 1 <= self.target_dim < input_dim:
            raise ValueError(f"target_dim={self.target_dim} needs 1 <= d < {input_dim}")
        if self.target_dim >= n_points:
            raise ValueError("target_dim must be smaller than the number of points")
        if self.reg_scale < 0:
            raise ValueError("reg_scale must be >= 0")


@dataclass
class LleModel:
    weight_matrix: sp.csr_matrix
    embedding: np.ndarray
    eigenvalues: np.ndarray
    neighbors: np.ndarray


def knn(points, k: int) -> np.ndarray:
    """Indices of the ``k`` nearest other points, ties broken by lower index."""
    x = np.asarray(points, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    n = x.shape[0]
    if not 1 <= k < n:
        raise ValueError(f"k={k} out of range for {n} points")
    dist = cdist(x, x, "sqeuclidean")
    np.fill_diagonal(dist, np.inf)
    return np.argsort(dist, axis=1, kind="stable")[:, :k]


def local_weights(x_i, neighbors, reg_scale: float = 1e-3) -> np.ndarray:
    """Affine reconstruction weights of ``x_i`` from its neighbours.

    The local Gram matrix is regularized by ``reg_scale * trace / K`` only when
    it is singular or nearly so (``K > D`` or huge condition number).
    """
    neighbors = np.atleast_2d(np.asarray(neighbors, dtype=np.float64))
    k, dim = neighbors.shape
    if k < 1:
        raise ValueError("need at least one neighbor")
    diff = np.asarray(x_i, dtype=np.float64)[None, :] - neighbors
    gram = diff @ diff.T
    ones = np.ones(k)
    if k > dim or np.linalg.cond(gram) > _COND_LIMIT:
        tr = np.trace(gram)
        gram = gram + (reg_scale * tr / k if tr > 0 else reg_scale) * np.eye(k)
    try:
        w = scipy.linalg.solve(gram, ones)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise np.linalg.LinAlgError(
            f"local Gram matrix singular after regularization (K={k}, D={dim}): {exc}") from None
    return w / w.sum()


def weight_matrix(points, k: int, reg_scale: float = 1e-3):
    x = np.asarray(points, dtype=np.float64)
    nbrs = knn(x, k)
    n = x.shape[0]
    rows = np.repeat(np.arange(n), k)
    vals = np.concatenate([local_weights(x[i], x[nbrs[i]], reg_scale) for i in range(n)])
    w = sp.csr_matrix((vals, (rows, nbrs.ravel())), shape=(n, n))
    return w, nbrs


def embedding_matrix(w) -> np.ndarray:
    """``(I - W)^T (I - W)`` as a dense symmetric matrix."""
    dense = w.toarray() if sp.issparse(w) else np.asarray(w, dtype=np.float64)
    a = np.eye(dense.shape[0]) - dense
    m = a.T @ a
    return 0.5 * (m + m.T)


def fix_signs(vectors: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Flip columns so the first entry with magnitude above ``tol`` is positive."""
    out = vectors.copy()
    for j in range(out.shape[1]):
        nz = np.flatnonzero(np.abs(out[:, j]) > tol)
        if nz.size and out[nz[0], j] < 0:
            out[:, j] = -out[:, j]
    return out


def lle_fit(points, cfg: LleConfig) -> LleModel:
    x = np.asarray(points, dtype=np.float64)
    cfg.validate(*x.shape)
    w, nbrs = weight_matrix(x, cfg.k_neighbors, cfg.reg_scale)
    m = embedding_matrix(w)
    try:
        evals, evecs = scipy.linalg.eigh(m, subset_by_index=[0, cfg.target_dim])
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise np.linalg.LinAlgError(f"eigen-decomposition of the LLE matrix failed: {exc}") from None
    # drop the bottom (constant) eigenvector
    return LleModel(w, fix_signs(evecs[:, 1:]), evals, nbrs)


def lle_reduce(points, cfg: LleConfig) -> np.ndarray:
    """Embed ``points`` (N x D) into ``cfg.target_dim`` dimensions; columns are unit norm."""
    return lle_fit(points, cfg).embedding


def pca_reduce(points, d: int, fit_points=None) -> np.ndarray:
    """Project onto the top-``d`` principal axes.

    Axes and mean come from ``fit_points`` when given (default: ``points``).
    """
    x = np.asarray(points, dtype=np.float64)
    ref = x if fit_points is None else np.asarray(fit_points, dtype=np.float64)
    if not 1 <= d < ref.shape[1]:
        raise ValueError(f"d={d} must satisfy 1 <= d < {ref.shape[1]}")
    mean = ref.mean(axis=0)
    centered = ref - mean
    cov = centered.T @ centered / max(ref.shape[0] - 1, 1)
    evals, evecs = np.linalg.eigh(cov)
    axes = fix_signs(evecs[:, ::-1][:, :d])
    return (x - mean) @ axes
