"""Realize block labels and adjacency matrices from a stochastic block model."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import seeding
from .model import SbmParams
from .seeding import Seed, as_seed


@dataclass(frozen=True, eq=False)
class GraphSample:
    """Block labels ``tau`` (0-based) and one dense 0/1 ``uint8`` matrix per modality."""

    tau: np.ndarray
    adjacency: tuple[np.ndarray, ...]
    directed: bool = False

    @property
    def n(self) -> int:
        return int(self.tau.shape[0])

    @property
    def S(self) -> int:
        return len(self.adjacency)

    def restrict(self, m: int) -> "GraphSample":
        """The sample induced on the first ``m`` vertices."""
        return GraphSample(self.tau[:m].copy(), tuple(A[:m, :m].copy() for A in self.adjacency), self.directed)

    def equals(self, other: "GraphSample") -> bool:
        return (
            self.directed == other.directed
            and np.array_equal(self.tau, other.tau)
            and self.S == other.S
            and all(np.array_equal(a, b) for a, b in zip(self.adjacency, other.adjacency))
        )


def _draw_labels(rng: np.random.Generator, size: int, rho: np.ndarray) -> np.ndarray:
    cdf = np.cumsum(rho)
    labels = np.searchsorted(cdf, rng.random(size), side="right")
    return np.minimum(labels, len(rho) - 1).astype(np.int64)


def sample_tau(n: int, rho, seed=None) -> np.ndarray:
    """i.i.d. block labels in ``0..K-1`` with ``P(label = k) = rho[k]``."""
    rho = np.asarray(rho, dtype=np.float64)
    return _draw_labels(as_seed(seed).generator(seeding.TAU), int(n), rho)


def sample_adjacency(tau, params: SbmParams, seed=None) -> GraphSample:
    """Bernoulli edges given labels, independently per modality.

    Undirected graphs draw the strict upper triangle and mirror it, so
    symmetry holds by construction.
    """
    tau = np.asarray(tau, dtype=np.int64)
    seed = as_seed(seed)
    n = tau.shape[0]
    mats = []
    for s, M in enumerate(params.modalities):
        rng = seed.generator(seeding.ADJACENCY, s)
        P = M[np.ix_(tau, tau)]
        A = rng.random((n, n)) < P
        if params.directed:
            np.fill_diagonal(A, False)
        else:
            A = np.triu(A, 1)
            A = A | A.T
        mats.append(A.astype(np.uint8))
    return GraphSample(tau.copy(), tuple(mats), params.directed)


def sample_graph(params: SbmParams, n: int, seed=None) -> GraphSample:
    seed = as_seed(seed)
    return sample_adjacency(sample_tau(n, params.rho, seed), params, seed)


def extend_sample(existing: GraphSample, params: SbmParams, seed=None) -> GraphSample:
    """Add one vertex with a fresh label and fresh incident edges.

    The draws for the new vertex are keyed by its index, so growing a graph
    one vertex at a time from the same seed is reproducible.
    """
    seed = as_seed(seed)
    n = existing.n
    rng = seed.generator(seeding.EXTEND, n)
    new_label = _draw_labels(rng, 1, params.rho)
    tau = np.concatenate([existing.tau, new_label])
    k = int(new_label[0])
    mats = []
    for s, M in enumerate(params.modalities):
        A = np.zeros((n + 1, n + 1), dtype=np.uint8)
        if n:
            A[:n, :n] = existing.adjacency[s]
        out_edges = rng.random(n) < M[k, existing.tau]
        if params.directed:
            in_edges = rng.random(n) < M[existing.tau, k]
        else:
            in_edges = out_edges
        A[n, :n] = out_edges
        A[:n, n] = in_edges
        mats.append(A)
    return GraphSample(tau, tuple(mats), params.directed)


def empty_sample(params: SbmParams) -> GraphSample:
    return GraphSample(
        np.zeros(0, dtype=np.int64),
        tuple(np.zeros((0, 0), dtype=np.uint8) for _ in params.modalities),
        params.directed,
    )


def grow_sample(params: SbmParams, n: int, seed=None, start: GraphSample | None = None) -> GraphSample:
    """Grow ``start`` (default: the empty graph) to ``n`` vertices by repeated extension."""
    g = empty_sample(params) if start is None else start
    while g.n < n:
        g = extend_sample(g, params, seed)
    return g
