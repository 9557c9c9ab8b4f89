"""Choosing the number of blocks, and the end-to-end partitioning estimator.

Two estimators are provided:

* ``estimate_k_hat``: least ``K'`` whose clustering residual ``||C - Z||_F``
  is at most ``n ** xi`` (``3/8 < xi < 1/2``). Needs no model constants.
* ``estimate_k_check``: greatest ``K' <= floor(1/theta)`` whose smallest part
  has more than ``theta * n`` rows and whose centroids are pairwise at least
  ``zeta`` apart. Needs lower bounds on model constants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils import check_array

from .clustering import (
    DEFAULT_MAX_ITER,
    DEFAULT_RESTARTS,
    DEFAULT_TOL,
    Clustering,
    assignment_from_clustering,
    centroid_separation,
    lloyd_cluster,
)
from .embedding import DEFAULT_OMEGA, AdjacencySpectralEmbedding, embed_graph
from .exceptions import NoKFound, ThetaOutOfRange
from ._validation import check_modalities, per_modality

DEFAULT_XI = 0.40


@dataclass
class TraceRow:
    k: int
    objective: float  # ||C - Z||_F
    statistic: float  # log_n ||C - Z||_F
    min_part: int
    separation: float
    qualifies: bool


@dataclass
class SelectionTrace:
    estimator: str
    rows: list[TraceRow] = field(default_factory=list)
    chosen: int | None = None
    clusterings: dict[int, Clustering] = field(default_factory=dict, repr=False)

    @property
    def ks(self) -> list[int]:
        return [r.k for r in self.rows]

    def as_records(self) -> list[dict]:
        return [
            {"estimator": self.estimator, "k": r.k, "objective": r.objective, "statistic": r.statistic,
             "min_part": r.min_part, "separation": r.separation, "qualifies": r.qualifies}
            for r in self.rows
        ]


TRACE_COLUMNS = ["estimator", "k", "objective", "statistic", "min_part", "separation", "qualifies"]


def log_statistic(residual: float, n: int) -> float:
    """``log_n(residual)``; ``-inf`` for a zero residual."""
    if residual <= 0:
        return -math.inf
    return math.log(residual) / math.log(n)


def _default_clusterer(restarts, seed, max_iter, tol):
    def cluster(Z, k):
        return lloyd_cluster(Z, k, restarts=restarts, seed=seed, max_iter=max_iter, tol=tol)
    return cluster


def _row(c: Clustering, n: int, qualifies: bool) -> TraceRow:
    return TraceRow(
        k=c.k_parts,
        objective=c.residual,
        statistic=log_statistic(c.residual, n),
        min_part=int(c.part_sizes.min()),
        separation=centroid_separation(c),
        qualifies=qualifies,
    )


def estimate_k_hat(Z, n: int | None = None, xi: float = DEFAULT_XI, k_max: int | None = None, *,
                   restarts: int = DEFAULT_RESTARTS, seed=None, max_iter: int = DEFAULT_MAX_ITER,
                   tol: float = DEFAULT_TOL, clusterer=None):
    """Return ``(k_hat, trace)``; raise ``NoKFound`` if no ``K' <= k_max`` qualifies."""
    Z = check_array(Z, dtype=np.float64)
    n = Z.shape[0] if n is None else int(n)
    if not 3 / 8 < xi < 1 / 2:
        raise ValueError(f"xi must lie in (3/8, 1/2), got {xi}")
    if k_max is None:
        k_max = min(2 * Z.shape[1] + 2, Z.shape[0])
    k_max = min(int(k_max), Z.shape[0])
    if k_max < 1:
        raise ValueError(f"k_max must be positive, got {k_max}")
    cluster = clusterer or _default_clusterer(restarts, seed, max_iter, tol)
    threshold = float(n) ** xi
    trace = SelectionTrace("hat")
    for k in range(1, k_max + 1):
        c = cluster(Z, k)
        ok = c.residual <= threshold
        trace.rows.append(_row(c, n, ok))
        trace.clusterings[k] = c
        if ok:
            trace.chosen = k
            return k, trace
    raise NoKFound(f"no K' <= {k_max} has residual <= n^xi = {threshold:.4g}", trace)


def k_hat_from_trace(trace: SelectionTrace, n: int, xi: float) -> int | None:
    """Re-threshold an existing trace at a different ``xi`` (``None`` if nothing qualifies)."""
    threshold = float(n) ** xi
    for r in trace.rows:
        if r.objective <= threshold:
            return r.k
    return None


def check_predicate(c: Clustering, n: int, zeta: float, theta: float) -> bool:
    return bool(c.part_sizes.min() > theta * n and centroid_separation(c) >= zeta)


def estimate_k_check(Z, n: int | None = None, zeta: float = 0.01, theta: float = 0.25, *,
                     restarts: int = DEFAULT_RESTARTS, seed=None, max_iter: int = DEFAULT_MAX_ITER,
                     tol: float = DEFAULT_TOL, clusterer=None):
    """Return ``(k_check, trace)``; ``k_check = 0`` when no candidate qualifies."""
    Z = check_array(Z, dtype=np.float64)
    n = Z.shape[0] if n is None else int(n)
    if not 0 < theta <= 1:
        raise ThetaOutOfRange(f"theta must lie in (0, 1], got {theta}")
    if not zeta > 0:
        raise ValueError(f"zeta must be positive, got {zeta}")
    cluster = clusterer or _default_clusterer(restarts, seed, max_iter, tol)
    trace = SelectionTrace("check", chosen=0)
    for k in range(1, min(math.floor(1 / theta), Z.shape[0]) + 1):
        c = cluster(Z, k)
        ok = check_predicate(c, n, zeta, theta)
        trace.rows.append(_row(c, n, ok))
        trace.clusterings[k] = c
        if ok:
            trace.chosen = k
    return trace.chosen, trace


def extended_partition(graphs, R, mode="rows", xi: float = DEFAULT_XI, k_max: int | None = None,
                       seed=None, restarts: int = DEFAULT_RESTARTS):
    """Embed, pick ``K' = k_hat``, and return ``(tau_hat, k_hat, trace)``."""
    graphs = check_modalities(graphs)
    Rs = per_modality(R, len(graphs), name="R")
    _, Z = embed_graph(graphs, Rs, mode)
    n = Z.shape[0]
    if k_max is None:
        k_max = min(2 * sum(Rs) + 2, n)
    k_hat, trace = estimate_k_hat(Z, n, xi, k_max, restarts=restarts, seed=seed)
    return assignment_from_clustering(trace.clusterings[k_hat]), k_hat, trace


class AdjacencySpectralPartition(ClusterMixin, BaseEstimator):
    """Adjacency-spectral partitioning of the vertices of one or more graphs.

    Parameters
    ----------
    n_components : int or list of int
        Known upper bound ``R`` on the rank of each communication matrix.
    n_blocks : int or None
        Number of blocks if known. If ``None`` it is estimated with
        ``selector``.
    mode : {"rows", "columns", "neither"}
    selector : {"hat", "check"}
        ``"hat"`` runs the residual-threshold procedure, ``"check"`` the
        part-size/separation procedure (requires ``zeta`` and ``theta``).
    xi, zeta, theta, k_max
        Selection settings.
    restarts : int
        Lloyd restarts per candidate block count.
    random_state : int, (value, stream) or Seed

    Attributes
    ----------
    labels_ : ndarray of shape (n,)
        Canonically numbered block assignment.
    n_blocks_ : int
    features_ : ndarray
    clustering_ : Clustering
    trace_ : SelectionTrace or None
    """

    def __init__(self, n_components=2, n_blocks=None, mode="rows", selector="hat", xi=DEFAULT_XI,
                 zeta=0.01, theta=0.25, k_max=None, restarts=DEFAULT_RESTARTS, omega=DEFAULT_OMEGA,
                 random_state=None):
        self.n_components = n_components
        self.n_blocks = n_blocks
        self.mode = mode
        self.selector = selector
        self.xi = xi
        self.zeta = zeta
        self.theta = theta
        self.k_max = k_max
        self.restarts = restarts
        self.omega = omega
        self.random_state = random_state

    def fit(self, X, y=None):
        graphs = check_modalities(X)
        self.embedding_ = AdjacencySpectralEmbedding(self.n_components, self.mode, self.omega).fit(graphs)
        Z = self.features_ = self.embedding_.features_
        n = Z.shape[0]
        self.trace_ = None
        if self.n_blocks is not None:
            k = int(self.n_blocks)
            clustering = lloyd_cluster(Z, k, self.restarts, self.random_state)
        elif self.selector == "hat":
            k_max = self.k_max
            if k_max is None:
                Rs = per_modality(self.n_components, len(graphs), name="n_components")
                k_max = min(2 * sum(Rs) + 2, n)
            k, self.trace_ = estimate_k_hat(Z, n, self.xi, k_max, restarts=self.restarts,
                                            seed=self.random_state)
            clustering = self.trace_.clusterings[k]
        elif self.selector == "check":
            k, self.trace_ = estimate_k_check(Z, n, self.zeta, self.theta, restarts=self.restarts,
                                              seed=self.random_state)
            if k == 0:
                raise NoKFound("no candidate block count met the part-size and separation checks",
                               self.trace_)
            clustering = self.trace_.clusterings[k]
        else:
            raise ValueError(f"selector must be 'hat' or 'check', got {self.selector!r}")
        self.n_blocks_ = k
        self.clustering_ = clustering
        self.labels_ = assignment_from_clustering(clustering)
        return self
