"""Scaled singular-vector embeddings of adjacency matrices."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.linalg
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_adjacency, check_modalities, per_modality
from .exceptions import DimensionError, EmptyInput, OmegaOutOfRange

DEFAULT_OMEGA = 0.8


class KnowledgeMode(str, Enum):
    """What is known to be pairwise distinct: rows of M, columns of M, or neither."""

    ROWS = "rows"
    COLUMNS = "columns"
    NEITHER = "neither"

    @classmethod
    def coerce(cls, value) -> "KnowledgeMode":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"mode must be one of rows|columns|neither, got {value!r}") from None


@dataclass(frozen=True, eq=False)
class ModalityEmbedding:
    R: int
    sigma: np.ndarray
    X: np.ndarray
    Y: np.ndarray


def full_svd(A: np.ndarray):
    """All singular values (nonincreasing) plus left/right singular vectors.

    Symmetric matrices go through ``eigh``: with ``A = Q diag(w) Q^T``,
    ``U = Q``, ``V = Q diag(sign w)``, ``sigma = |w|`` is an SVD and is
    several times cheaper than a general SVD.
    """
    if np.array_equal(A, A.T):
        w, Q = np.linalg.eigh(A)
        order = np.argsort(-np.abs(w), kind="stable")
        w = w[order]
        U = Q[:, order]
        signs = np.where(w < 0, -1.0, 1.0)
        return np.abs(w), U, U * signs
    U, sigma, Vt = scipy.linalg.svd(A, lapack_driver="gesdd")
    return sigma, U, Vt.T


def singular_values(A) -> np.ndarray:
    A = np.asarray(A, dtype=np.float64)
    if np.array_equal(A, A.T):
        return np.sort(np.abs(np.linalg.eigvalsh(A)))[::-1]
    return scipy.linalg.svdvals(A)


def svd_embed(A, R: int) -> ModalityEmbedding:
    """Top-``R`` embedding ``X = U sqrt(S)``, ``Y = V sqrt(S)``; keeps the full spectrum."""
    A = check_adjacency(A)
    n = A.shape[0]
    R = int(R)
    if not 1 <= R <= n:
        raise DimensionError(f"embedding dimension R={R} must satisfy 1 <= R <= n={n}")
    return truncate_svd(full_svd(A), R)


def truncate_svd(decomposition, R: int) -> ModalityEmbedding:
    """Embedding from a precomputed ``(sigma, U, V)``; lets several ``R`` share one decomposition."""
    sigma, U, V = decomposition
    R = int(R)
    if not 1 <= R <= sigma.shape[0]:
        raise DimensionError(f"embedding dimension R={R} must satisfy 1 <= R <= n={sigma.shape[0]}")
    root = np.sqrt(sigma[:R])
    return ModalityEmbedding(R=R, sigma=sigma, X=U[:, :R] * root, Y=V[:, :R] * root)


def assemble_features(embeddings, mode="rows") -> np.ndarray:
    """Concatenate per-modality blocks: all X's, all Y's, or all X's then all Y's."""
    embeddings = list(embeddings)
    if not embeddings:
        raise EmptyInput("no embeddings to assemble")
    n = embeddings[0].X.shape[0]
    if any(e.X.shape[0] != n for e in embeddings):
        raise DimensionError("embeddings disagree on the vertex count")
    mode = KnowledgeMode.coerce(mode)
    if mode is KnowledgeMode.ROWS:
        blocks = [e.X for e in embeddings]
    elif mode is KnowledgeMode.COLUMNS:
        blocks = [e.Y for e in embeddings]
    else:
        blocks = [e.X for e in embeddings] + [e.Y for e in embeddings]
    return np.hstack(blocks)


def estimate_rank(sigma, n: int, omega: float = DEFAULT_OMEGA) -> int:
    """Number of singular values exceeding ``n ** omega``; needs ``3/4 < omega < 1``."""
    if not 0.75 < omega < 1.0:
        raise OmegaOutOfRange(f"omega must lie in (3/4, 1), got {omega}")
    return int(np.count_nonzero(np.asarray(sigma) > float(n) ** omega))


def embed_graph(graphs, R, mode="rows"):
    """Embed every modality and assemble the clustering features.

    Returns ``(embeddings, Z)``.
    """
    graphs = check_modalities(graphs)
    Rs = per_modality(R, len(graphs), name="R")
    embeddings = [svd_embed(A, r) for A, r in zip(graphs, Rs)]
    return embeddings, assemble_features(embeddings, mode)


class AdjacencySpectralEmbedding(TransformerMixin, BaseEstimator):
    """Adjacency spectral embedding of one or several graph modalities.

    Parameters
    ----------
    n_components : int or list of int
        Upper bound ``R`` on the rank of each communication matrix.
    mode : {"rows", "columns", "neither"}
        Which singular vectors feed the features: ``X``, ``Y`` or ``[X|Y]``.
    omega : float
        Exponent for the rank estimate stored in ``rank_estimates_``.

    Attributes
    ----------
    embeddings_ : list of ModalityEmbedding
    singular_values_ : list of ndarray
    rank_estimates_ : list of int
    features_ : ndarray of shape (n, d)
    """

    def __init__(self, n_components=2, mode="rows", omega=DEFAULT_OMEGA):
        self.n_components = n_components
        self.mode = mode
        self.omega = omega

    def fit(self, X, y=None):
        graphs = check_modalities(X)
        KnowledgeMode.coerce(self.mode)
        self.embeddings_, self.features_ = embed_graph(graphs, self.n_components, self.mode)
        self.singular_values_ = [e.sigma for e in self.embeddings_]
        n = graphs[0].shape[0]
        self.rank_estimates_ = [estimate_rank(s, n, self.omega) for s in self.singular_values_]
        self.n_vertices_ = n
        return self

    def fit_transform(self, X, y=None, **fit_params):
        return self.fit(X, y).features_

    def transform(self, X):
        """Features of the fitted graph. The embedding is transductive, so ``X``
        must be the graph passed to ``fit``."""
        check_is_fitted(self, "features_")
        graphs = check_modalities(X)
        if graphs[0].shape[0] != self.n_vertices_:
            raise DimensionError("transform only applies to the graph the embedding was fitted on")
        return self.features_
