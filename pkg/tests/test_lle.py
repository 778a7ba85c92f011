import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import spearmanr

from faultloc.lle import (LleConfig, embedding_matrix, fix_signs, knn, lle_fit, lle_reduce,
                          local_weights, pca_reduce, weight_matrix)
from oracles import brute_knn, constrained_ls_weights, knn_overlap, swiss_roll


def test_knn_1d_example():
    np.testing.assert_array_equal(knn([0.0, 1.0, 3.0], 1)[:, 0], [1, 0, 1])


def test_knn_duplicate_is_nearest():
    pts = np.array([[0.0, 0.0], [5.0, 5.0], [0.0, 0.0], [1.0, 0.0]])
    assert knn(pts, 1)[0, 0] == 2
    assert knn(pts, 1)[2, 0] == 0


def test_knn_matches_brute_force():
    pts = np.random.default_rng(0).normal(size=(50, 3))
    np.testing.assert_array_equal(knn(pts, 5), brute_knn(pts, 5))


def test_knn_ties_prefer_lower_index():
    pts = np.array([[0.0], [1.0], [-1.0], [2.0]])
    assert list(knn(pts, 2)[0]) == [1, 2]


@pytest.mark.parametrize("k", [0, 4])
def test_knn_range(k):
    with pytest.raises(ValueError):
        knn(np.zeros((4, 2)), k)


def test_local_weights_single_neighbor():
    np.testing.assert_array_equal(local_weights([1.0, 2.0], [[3.0, 4.0]]), [1.0])


def test_local_weights_symmetric_pair():
    x = np.array([1.0, 1.0, 1.0])
    d = np.array([0.3, -0.2, 0.5])
    np.testing.assert_allclose(local_weights(x, [x - d, x + d]), [0.5, 0.5], atol=1e-12)


def test_local_weights_match_constrained_least_squares():
    rng = np.random.default_rng(11)
    for _ in range(20):
        x = rng.normal(size=5)
        nb = rng.normal(size=(3, 5))
        np.testing.assert_allclose(local_weights(x, nb), constrained_ls_weights(x, nb),
                                   atol=1e-6)


def test_local_weights_regularized_when_k_exceeds_dim():
    rng = np.random.default_rng(2)
    w = local_weights(rng.normal(size=2), rng.normal(size=(6, 2)))
    assert np.all(np.isfinite(w)) and abs(w.sum() - 1) < 1e-12


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10 ** 6), n=st.integers(12, 40), k=st.integers(2, 8),
       dim=st.integers(2, 6))
def test_weight_rows_sum_to_one_and_m_annihilates_ones(seed, n, k, dim):
    pts = np.random.default_rng(seed).normal(size=(n, dim))
    w, nbrs = weight_matrix(pts, k)
    np.testing.assert_allclose(np.asarray(w.sum(axis=1)).ravel(), 1.0, atol=1e-9)
    dense = w.toarray()
    for i in range(n):
        assert set(np.flatnonzero(dense[i])) <= set(nbrs[i])
    m = embedding_matrix(w)
    assert np.max(np.abs(m @ np.ones(n))) < 1e-9
    np.testing.assert_array_equal(m, m.T)
    assert np.linalg.eigvalsh(m).min() > -1e-9


def test_embedding_matrix_of_zero_is_identity():
    np.testing.assert_array_equal(embedding_matrix(sp.csr_matrix((5, 5))), np.eye(5))


def test_embedding_matrix_matches_dense_product():
    rng = np.random.default_rng(3)
    w = rng.uniform(size=(6, 6))
    np.fill_diagonal(w, 0)
    w /= w.sum(axis=1, keepdims=True)
    i_w = np.eye(6) - w
    np.testing.assert_allclose(embedding_matrix(sp.csr_matrix(w)), i_w.T @ i_w, atol=1e-12)
    vals, vecs = np.linalg.eigh(embedding_matrix(w))
    assert abs(vals[0]) < 1e-9
    const = vecs[:, 0] / vecs[0, 0]
    np.testing.assert_allclose(const, 1.0, atol=1e-6)


def test_line_embedding_preserves_order():
    v = np.array([1.0, 2.0, -0.5])
    pts = np.arange(30)[:, None] * v[None, :]
    emb = lle_reduce(pts, LleConfig(k_neighbors=2, target_dim=1))
    rho = spearmanr(np.arange(30), emb[:, 0]).correlation
    assert abs(rho) == pytest.approx(1.0)


def test_embedding_columns_orthonormal():
    pts = np.random.default_rng(4).normal(size=(80, 5))
    emb = lle_reduce(pts, LleConfig(k_neighbors=8, target_dim=3))
    np.testing.assert_allclose(emb.T @ emb, np.eye(3), atol=1e-8)


def test_sign_convention():
    emb = lle_reduce(np.random.default_rng(5).normal(size=(60, 4)),
                     LleConfig(k_neighbors=6, target_dim=2))
    for j in range(2):
        first = emb[np.flatnonzero(np.abs(emb[:, j]) > 1e-12)[0], j]
        assert first > 0
    np.testing.assert_array_equal(fix_signs(-emb), emb)


def test_translation_invariance():
    pts = np.random.default_rng(6).normal(size=(70, 4))
    cfg = LleConfig(k_neighbors=7, target_dim=2)
    np.testing.assert_allclose(lle_reduce(pts + 3.5, cfg), lle_reduce(pts, cfg), atol=1e-6)


def test_bottom_eigenvalue_is_zero():
    model = lle_fit(np.random.default_rng(7).normal(size=(50, 3)), LleConfig(5, 2))
    assert abs(model.eigenvalues[0]) < 1e-9


@pytest.mark.parametrize("cfg", [LleConfig(k_neighbors=0), LleConfig(k_neighbors=50),
                                 LleConfig(target_dim=4), LleConfig(k_neighbors=3, target_dim=0)])
def test_config_validation(cfg):
    with pytest.raises(ValueError):
        lle_reduce(np.random.default_rng(0).normal(size=(50, 4)), cfg)


def test_balanced_swiss_roll_neighborhoods():
    # a roll whose unrolled sheet is roughly square; the classic 21-high roll is checked
    # (and discussed) in the acceptance suite
    t_range = (1.5 * np.pi, 3.0 * np.pi)
    pts, _ = swiss_roll(800, seed=0, t_range=t_range, height=40.0)
    emb = lle_reduce(pts, LleConfig(k_neighbors=10, target_dim=2))
    assert knn_overlap(pts, emb) >= 0.85


# --- PCA


def test_pca_exact_subspace():
    rng = np.random.default_rng(8)
    low = rng.normal(size=(40, 2))
    basis = np.linalg.qr(rng.normal(size=(6, 2)))[0]
    pts = low @ basis.T + 1.0
    z = pca_reduce(pts, 2)
    axes = np.linalg.lstsq(z, pts - pts.mean(0), rcond=None)[0]
    assert np.max(np.abs(z @ axes - (pts - pts.mean(0)))) < 1e-10


def test_pca_centered_projection():
    z = pca_reduce(np.random.default_rng(9).normal(size=(30, 5)) + 7, 3)
    np.testing.assert_allclose(z.mean(axis=0), 0, atol=1e-12)


def test_pca_matches_svd_oracle():
    x = np.random.default_rng(10).normal(size=(20, 6))
    centered = x - x.mean(0)
    vt = np.linalg.svd(centered, full_matrices=False)[2][:3].T
    vt = fix_signs(vt)
    np.testing.assert_allclose(pca_reduce(x, 3), centered @ vt, atol=1e-8)


def test_pca_out_of_sample_uses_fit_points():
    rng = np.random.default_rng(12)
    fit, other = rng.normal(size=(30, 5)), rng.normal(size=(4, 5))
    both = pca_reduce(np.vstack([fit, other]), 2, fit_points=fit)
    np.testing.assert_allclose(both[:30], pca_reduce(fit, 2), atol=1e-12)


def test_pca_dimension_checked():
    with pytest.raises(ValueError):
        pca_reduce(np.zeros((10, 3)), 3)
