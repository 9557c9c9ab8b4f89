import numpy as np
import pytest
import scipy.linalg

from blockspec.diagnostics import noiseless_svd, probability_matrix
from blockspec.embedding import (
    AdjacencySpectralEmbedding,
    KnowledgeMode,
    assemble_features,
    embed_graph,
    estimate_rank,
    full_svd,
    singular_values,
    svd_embed,
)
from blockspec.exceptions import DimensionError, OmegaOutOfRange
from blockspec.model import SbmParams, validate_params
from blockspec.sampler import sample_graph, sample_tau
from blockspec.seeding import Seed


def _random_graph(rng, n, p=0.3, directed=False):
    A = (rng.uniform(size=(n, n)) < p).astype(float)
    if not directed:
        A = np.triu(A, 1)
        A = A + A.T
    np.fill_diagonal(A, 0)
    return A


def test_zero_matrix():
    e = svd_embed(np.zeros((5, 5)), 2)
    assert np.all(e.sigma == 0) and np.all(e.X == 0) and np.all(e.Y == 0)


@pytest.mark.parametrize("directed", [False, True])
def test_full_svd_matches_lapack(rng, directed):
    A = _random_graph(rng, 40, directed=directed)
    sigma, U, V = full_svd(A)
    np.testing.assert_allclose(sigma, scipy.linalg.svdvals(A), atol=1e-10)
    np.testing.assert_allclose((U * sigma) @ V.T, A, atol=1e-10)
    np.testing.assert_allclose(U.T @ U, np.eye(40), atol=1e-10)
    np.testing.assert_allclose(V.T @ V, np.eye(40), atol=1e-10)
    assert np.all(np.diff(sigma) <= 1e-12)


@pytest.mark.parametrize("directed", [False, True])
def test_truncation_error_is_tail_energy(rng, directed):
    A = _random_graph(rng, 50, directed=directed)
    for R in (1, 3, 10):
        e = svd_embed(A, R)
        err = np.linalg.norm(A - e.X @ e.Y.T) ** 2
        assert err == pytest.approx(np.sum(e.sigma[R:] ** 2), rel=1e-9)


def test_sign_flip_invariance(rng):
    # X X^T and Y Y^T do not depend on the sign convention of singular vectors
    A = _random_graph(rng, 30, directed=True)
    e = svd_embed(A, 4)
    U, s, Vt = scipy.linalg.svd(A)
    flips = np.array([1, -1, -1, 1])
    X2 = U[:, :4] * flips * np.sqrt(s[:4])
    np.testing.assert_allclose(e.X @ e.X.T, X2 @ X2.T, atol=1e-10)
    np.testing.assert_allclose(e.X @ e.Y.T, X2 @ (Vt[:4].T * flips * np.sqrt(s[:4])).T, atol=1e-10)


def test_top_singular_value_at_most_n(rng):
    for n in (2, 10, 60):
        assert singular_values(_random_graph(rng, n, p=0.9))[0] <= n
    assert singular_values(np.array([[0, 1], [1, 0]]))[0] == pytest.approx(1.0)


def test_validation():
    with pytest.raises(ValueError, match="0/1"):
        svd_embed(np.array([[0, 2], [2, 0]]), 1)
    with pytest.raises(ValueError, match="diagonal"):
        svd_embed(np.eye(3), 1)
    with pytest.raises(DimensionError):
        svd_embed(np.zeros((3, 3)), 4)
    with pytest.raises(DimensionError):
        svd_embed(np.zeros((3, 4)), 1)


def test_feature_assembly_modes(rng):
    A1, A2 = _random_graph(rng, 20), _random_graph(rng, 20, directed=True)
    embeddings, Z = embed_graph(A1, 2, "rows")
    assert np.array_equal(Z, embeddings[0].X)
    _, Z = embed_graph(A1, 2, "neither")
    assert Z.shape == (20, 4)
    embeddings, Z = embed_graph([A1, A2], [2, 3], "rows")
    assert Z.shape == (20, 5)
    assert np.array_equal(Z[:, :2], embeddings[0].X) and np.array_equal(Z[:, 2:], embeddings[1].X)
    Zc = assemble_features(embeddings, KnowledgeMode.COLUMNS)
    assert np.array_equal(Zc[:, 2:], embeddings[1].Y)
    Zn = assemble_features(embeddings, "neither")
    assert np.array_equal(Zn, np.hstack([embeddings[0].X, embeddings[1].X, embeddings[0].Y, embeddings[1].Y]))
    with pytest.raises(ValueError):
        KnowledgeMode.coerce("diagonal")


def test_estimate_rank_basic():
    assert estimate_rank(np.zeros(10), 10) == 0
    with pytest.raises(OmegaOutOfRange):
        estimate_rank(np.ones(3), 10, 0.7)
    with pytest.raises(OmegaOutOfRange):
        estimate_rank(np.ones(3), 10, 1.0)


def test_estimate_rank_noiseless(param1):
    # Noiseless spectrum at n=400 is about (58.8, 19.2), well under 400**0.8,
    # so the count is 0 here; it reaches 2 only for very large n.
    tau = sample_tau(400, param1.rho, Seed(0))
    P = probability_matrix(tau, param1.M)
    sv = scipy.linalg.svdvals(P)
    assert estimate_rank(sv, 400, 0.8) == 0
    assert estimate_rank(sv * 10, 400, 0.8) == 2
    # the thin route gives the same nonzero spectrum
    _, s, _ = noiseless_svd(tau, param1.M)
    np.testing.assert_allclose(s, sv[:2], rtol=1e-10)


def test_estimate_rank_sampled(kest):
    # frozen at this seed: sigma ~ (393.6, 224.5, 182.5, ...) against 1600**0.8 ~ 365.8
    g = sample_graph(kest, 1600, Seed(0, 0))
    sigma = singular_values(g.adjacency[0])
    assert estimate_rank(sigma, 1600, 0.8) == 1
    # the three signal values do separate from the bulk
    assert sigma[2] > 3 * sigma[3]


def test_estimate_rank_monotone_in_omega(kest):
    sigma = singular_values(sample_graph(kest, 300, Seed(1)).adjacency[0])
    ranks = [estimate_rank(sigma, 300, w) for w in np.linspace(0.76, 0.99, 12)]
    assert all(a >= b for a, b in zip(ranks, ranks[1:]))


def test_centered_rows_have_small_norm(param1):
    # Rows of X for vertices in one block concentrate around a common point
    g = sample_graph(param1, 800, Seed(2))
    X = svd_embed(g.adjacency[0], 2).X
    spread = max(np.linalg.norm(X[g.tau == k] - X[g.tau == k].mean(0), axis=1).mean() for k in range(3))
    gaps = [np.linalg.norm(X[g.tau == p].mean(0) - X[g.tau == q].mean(0)) for p in range(3) for q in range(p)]
    assert spread < min(gaps)


def test_tail_columns_norm(kest):
    g = sample_graph(kest, 300, Seed(3))
    e = svd_embed(g.adjacency[0], 6)
    r_hat = 3
    Xc = e.X[:, r_hat:]
    assert np.linalg.norm(Xc) <= np.sqrt(6 - r_hat) * np.sqrt(e.sigma[r_hat]) + 1e-12
    np.testing.assert_allclose(np.sum(e.X ** 2, axis=0), e.sigma[:6], rtol=1e-10)
    np.testing.assert_allclose(np.sum(e.Y ** 2, axis=0), e.sigma[:6], rtol=1e-10)


def test_estimator_api(param1):
    g = sample_graph(param1, 100, Seed(0))
    est = AdjacencySpectralEmbedding(n_components=3, mode="neither")
    Z = est.fit_transform(g.adjacency[0])
    assert Z.shape == (100, 6)
    assert np.array_equal(est.transform(g), Z)
    assert est.get_params() == {"n_components": 3, "mode": "neither", "omega": 0.8}
    assert len(est.rank_estimates_) == 1
    with pytest.raises(DimensionError):
        est.transform(np.zeros((5, 5)))


def test_directed_sample_embeds():
    params = validate_params(SbmParams(2, [0.5, 0.5], [[[0.6, 0.1], [0.3, 0.2]]], directed=True))
    g = sample_graph(params, 30, Seed(0))
    e = svd_embed(g.adjacency[0], 2)
    assert e.X.shape == e.Y.shape == (30, 2)
    assert not np.allclose(np.abs(e.X), np.abs(e.Y))
