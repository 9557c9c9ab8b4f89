"""Least-squares clustering of embedding rows into at most ``k`` parts.

``exact_min_sse`` enumerates every partition and is only usable for tiny
inputs; it is the reference the approximate ``lloyd_cluster`` is checked
against.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils import check_array
from sklearn.utils.validation import check_is_fitted

from . import seeding
from .exceptions import DimensionError, TooLargeForExact
from .seeding import as_seed

EXACT_GUARD = 14
DEFAULT_RESTARTS = 50
DEFAULT_MAX_ITER = 300
DEFAULT_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Clustering:
    """Labels in ``0..k_parts-1`` (parts may be empty), one centroid per part,
    and the objective ``||C - Z||_F^2`` where ``C = centroids[assignment]``.

    Centroids of empty parts are NaN for exact solutions and the last reseed
    point for Lloyd solutions; they never appear in ``C``.
    """

    k_parts: int
    assignment: np.ndarray
    centroids: np.ndarray
    objective: float
    history: tuple[float, ...] = field(default=())
    restart: int = 0

    @property
    def C(self) -> np.ndarray:
        return self.centroids[self.assignment]

    @property
    def part_sizes(self) -> np.ndarray:
        return np.bincount(self.assignment, minlength=self.k_parts)

    @property
    def residual(self) -> float:
        """``||C - Z||_F``."""
        return float(np.sqrt(max(self.objective, 0.0)))


def _check_Z(Z, k):
    Z = check_array(Z, dtype=np.float64, ensure_min_features=1)
    k = int(k)
    if not 1 <= k <= Z.shape[0]:
        raise DimensionError(f"number of parts k={k} must satisfy 1 <= k <= n={Z.shape[0]}")
    return Z, k


def _means(Z, labels, k):
    counts = np.bincount(labels, minlength=k)
    sums = np.zeros((k, Z.shape[1]))
    np.add.at(sums, labels, Z)
    with np.errstate(invalid="ignore", divide="ignore"):
        return sums / counts[:, None], counts


def _objective(Z, labels, centroids) -> float:
    diff = Z - centroids[labels]
    return float(np.einsum("ij,ij->", diff, diff))


@lru_cache(maxsize=64)
def _restricted_growth_strings(n: int, k: int) -> np.ndarray:
    """Every set partition of ``n`` items into at most ``k`` blocks, one row each.

    Row ``a`` satisfies ``a[0] = 0`` and ``a[i] <= min(max(a[:i]) + 1, k - 1)``.
    """
    rgs = np.zeros((1, 1), dtype=np.int8)
    top = np.zeros(1, dtype=np.int8)
    for _ in range(1, n):
        choices = np.minimum(top + 1, k - 1).astype(np.int64) + 1
        parent = np.repeat(np.arange(rgs.shape[0]), choices)
        starts = np.repeat(np.cumsum(choices) - choices, choices)
        value = (np.arange(parent.shape[0]) - starts).astype(np.int8)
        rgs = np.hstack([rgs[parent], value[:, None]])
        top = np.maximum(top[parent], value)
    rgs.setflags(write=False)
    return rgs


def exact_min_sse(Z, k: int, guard: int = EXACT_GUARD, chunk: int = 1 << 15) -> Clustering:
    """Global minimum of the within-part sum of squares over all partitions into <= k parts."""
    Z, k = _check_Z(Z, k)
    n = Z.shape[0]
    if n > guard:
        raise TooLargeForExact(f"n={n} exceeds the exact-enumeration guard ({guard})")
    parts = _restricted_growth_strings(n, k)
    total = float(np.einsum("ij,ij->", Z, Z))
    eye = np.eye(k, dtype=np.float64)
    best_val, best_idx = np.inf, 0
    # SSE = sum ||z||^2 - sum_parts ||part sum||^2 / |part|
    for start in range(0, parts.shape[0], chunk):
        onehot = eye[parts[start:start + chunk]]
        counts = onehot.sum(axis=1)
        sums = np.einsum("pnk,nd->pkd", onehot, Z)
        with np.errstate(invalid="ignore", divide="ignore"):
            gain = np.where(counts > 0, np.einsum("pkd,pkd->pk", sums, sums) / counts, 0.0)
        sse = total - gain.sum(axis=1)
        i = int(np.argmin(sse))
        if sse[i] < best_val:
            best_val, best_idx = float(sse[i]), start + i
    labels = parts[best_idx].astype(np.int64)
    centroids, _ = _means(Z, labels, k)
    return Clustering(k, labels, centroids, _objective(Z, labels, centroids))


def _kmeanspp(Z, k, rng):
    n = Z.shape[0]
    centers = np.empty((k, Z.shape[1]))
    centers[0] = Z[rng.integers(n)]
    d2 = np.sum((Z - centers[0]) ** 2, axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total > 0:
            idx = int(np.searchsorted(np.cumsum(d2), rng.random() * total, side="right"))
            idx = min(idx, n - 1)
        else:
            idx = int(rng.integers(n))
        centers[j] = Z[idx]
        d2 = np.minimum(d2, np.sum((Z - centers[j]) ** 2, axis=1))
    return centers


def _sq_dists(Z, centers):
    diff = Z[:, None, :] - centers[None, :, :]
    return np.einsum("ikd,ikd->ik", diff, diff)


def _lloyd_once(Z, k, rng, max_iter, tol):
    centers = _kmeanspp(Z, k, rng)
    labels = None
    history = []
    for _ in range(max_iter):
        d2 = _sq_dists(Z, centers)
        new_labels = np.argmin(d2, axis=1)  # ties go to the lowest centroid index
        own = d2[np.arange(Z.shape[0]), new_labels]
        counts = np.bincount(new_labels, minlength=k)
        for j in np.flatnonzero(counts == 0):
            # farthest point whose part can spare it; k <= n guarantees one exists
            donors = np.where(counts[new_labels] > 1, own, -np.inf)
            i = int(np.argmax(donors))
            counts[new_labels[i]] -= 1
            new_labels[i] = j
            counts[j] += 1
            centers[j] = Z[i]
            own[i] = 0.0
        means, counts = _means(Z, new_labels, k)
        centers = np.where(counts[:, None] > 0, means, centers)
        obj = _objective(Z, new_labels, centers)
        converged = labels is not None and (
            np.array_equal(new_labels, labels) or history[-1] - obj <= tol * history[-1]
        )
        labels = new_labels
        history.append(obj)
        if converged:
            break
    return labels, centers, history


def lloyd_cluster(Z, k: int, restarts: int = DEFAULT_RESTARTS, seed=None,
                  max_iter: int = DEFAULT_MAX_ITER, tol: float = DEFAULT_TOL) -> Clustering:
    """Best of ``restarts`` k-means++-seeded Lloyd runs.

    Restart ``r`` draws from stream ``(CLUSTER, k, r)`` of ``seed``, so the
    result does not depend on the order restarts are evaluated in; ties in
    the final objective go to the lowest restart index.
    """
    Z, k = _check_Z(Z, k)
    if restarts < 1:
        raise ValueError(f"restarts must be positive, got {restarts}")
    seed = as_seed(seed)
    best = None
    for r in range(int(restarts)):
        labels, centers, history = _lloyd_once(Z, k, seed.generator(seeding.CLUSTER, k, r), max_iter, tol)
        if best is None or history[-1] < best.objective:
            best = Clustering(k, labels, centers, history[-1], tuple(history), r)
    return best


def assignment_from_clustering(c: Clustering) -> np.ndarray:
    """Relabel parts by first appearance: the part holding row 0 becomes 0, and so on."""
    labels = np.asarray(c.assignment if isinstance(c, Clustering) else c)
    _, first = np.unique(labels, return_index=True)
    order = labels[np.sort(first)]
    mapping = np.empty(int(labels.max()) + 1, dtype=np.int64)
    mapping[order] = np.arange(order.shape[0])
    return mapping[labels]


def centroid_separation(c: Clustering) -> float:
    """Smallest distance between centroids of nonempty parts (``inf`` if fewer than two)."""
    live = c.centroids[c.part_sizes > 0]
    if live.shape[0] < 2:
        return np.inf
    d2 = _sq_dists(live, live)
    iu = np.triu_indices(live.shape[0], 1)
    return float(np.sqrt(d2[iu].min()))


class LeastSquaresKMeans(ClusterMixin, BaseEstimator):
    """Minimum sum-of-squares clustering with seeded k-means++ restarts.

    ``method="exact"`` enumerates all partitions instead (tiny inputs only).
    """

    def __init__(self, n_clusters=2, restarts=DEFAULT_RESTARTS, max_iter=DEFAULT_MAX_ITER,
                 tol=DEFAULT_TOL, method="lloyd", random_state=None):
        self.n_clusters = n_clusters
        self.restarts = restarts
        self.max_iter = max_iter
        self.tol = tol
        self.method = method
        self.random_state = random_state

    def fit(self, X, y=None):
        if self.method == "exact":
            result = exact_min_sse(X, self.n_clusters)
        elif self.method == "lloyd":
            result = lloyd_cluster(X, self.n_clusters, self.restarts, self.random_state,
                                   self.max_iter, self.tol)
        else:
            raise ValueError(f"method must be 'lloyd' or 'exact', got {self.method!r}")
        self.clustering_ = result
        self.labels_ = result.assignment
        self.cluster_centers_ = result.centroids
        self.inertia_ = result.objective
        self.objective_history_ = list(result.history)
        return self

    def predict(self, X):
        check_is_fitted(self, "cluster_centers_")
        X = check_array(X, dtype=np.float64)
        d2 = _sq_dists(X, np.nan_to_num(self.cluster_centers_, nan=np.inf))
        return np.argmin(d2, axis=1)
