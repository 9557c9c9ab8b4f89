import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.stats import ortho_group

from blockspec.clustering import (
    LeastSquaresKMeans,
    _restricted_growth_strings,
    assignment_from_clustering,
    centroid_separation,
    exact_min_sse,
    lloyd_cluster,
)
from blockspec.exceptions import DimensionError, TooLargeForExact
from blockspec.seeding import Seed


def brute_force_sse(Z, k):
    """Minimum over all k**n label vectors; independent of the partition enumeration."""
    best = np.inf
    for labels in itertools.product(range(k), repeat=Z.shape[0]):
        labels = np.array(labels)
        sse = sum(((Z[labels == j] - Z[labels == j].mean(0)) ** 2).sum() for j in set(labels.tolist()))
        best = min(best, sse)
    return best


def bell(n, k):
    # partitions of n items into at most k blocks (sum of Stirling numbers of the second kind)
    S = np.zeros((n + 1, k + 1), dtype=object)
    S[0, 0] = 1
    for i in range(1, n + 1):
        for j in range(1, k + 1):
            S[i, j] = j * S[i - 1, j] + S[i - 1, j - 1]
    return int(sum(S[n, 1:]))


def test_partition_enumeration_counts():
    for n, k in [(1, 1), (4, 2), (6, 3), (8, 4), (10, 10)]:
        rgs = _restricted_growth_strings(n, k)
        assert rgs.shape == (bell(n, k), n)
        assert len({tuple(r) for r in rgs.tolist()}) == rgs.shape[0]


def test_k_equals_n():
    Z = np.random.default_rng(0).normal(size=(6, 2))
    for c in (exact_min_sse(Z, 6), lloyd_cluster(Z, 6, restarts=5, seed=0)):
        assert c.objective == pytest.approx(0.0, abs=1e-12)
        assert sorted(c.assignment.tolist()) == list(range(6))


def test_k_equals_one():
    Z = np.random.default_rng(1).normal(size=(9, 3))
    expected = ((Z - Z.mean(0)) ** 2).sum()
    for c in (exact_min_sse(Z, 1), lloyd_cluster(Z, 1, restarts=3, seed=0)):
        np.testing.assert_allclose(c.centroids[0], Z.mean(0))
        assert c.objective == pytest.approx(expected, rel=1e-12)


def test_two_pairs():
    Z = np.array([[0, 0], [0, 1], [10, 0], [10, 1]], dtype=float)
    for c in (exact_min_sse(Z, 2), lloyd_cluster(Z, 2, restarts=10, seed=0)):
        assert c.objective == pytest.approx(1.0)
        assert assignment_from_clustering(c).tolist() == [0, 0, 1, 1]


def test_planted_partition_recovered():
    rng = np.random.default_rng(5)
    for k in (2, 3, 5):
        centers = 10.0 * np.arange(k)[:, None] * np.ones((1, 2))
        truth = np.repeat(np.arange(k), k)
        Z = centers[truth] + rng.normal(scale=0.01, size=(k * k, 2))
        c = lloyd_cluster(Z, k, restarts=20, seed=Seed(0))
        assert np.array_equal(assignment_from_clustering(c), truth)


def test_exact_guard_and_bounds():
    with pytest.raises(TooLargeForExact):
        exact_min_sse(np.zeros((15, 1)), 2)
    with pytest.raises(DimensionError):
        lloyd_cluster(np.zeros((3, 1)), 4)
    with pytest.raises(DimensionError):
        exact_min_sse(np.zeros((3, 1)), 0)


def test_exact_matches_brute_force():
    rng = np.random.default_rng(2)
    for _ in range(40):
        n = int(rng.integers(1, 7))
        k = int(rng.integers(1, min(n, 3) + 1))
        Z = rng.normal(size=(n, int(rng.integers(1, 3))))
        assert exact_min_sse(Z, k).objective == pytest.approx(brute_force_sse(Z, k), abs=1e-10)


def test_lloyd_matches_exact_oracle():
    rng = np.random.default_rng(3)
    misses = 0
    for i in range(100):
        n = int(rng.integers(2, 11))
        k = int(rng.integers(1, min(n, 4) + 1))
        Z = rng.normal(size=(n, int(rng.integers(1, 4))))
        exact = exact_min_sse(Z, k).objective
        misses += abs(lloyd_cluster(Z, k, restarts=50, seed=Seed(i)).objective - exact) > 1e-9
    assert misses <= 1


def test_orthogonal_invariance_of_exact_objective():
    rng = np.random.default_rng(4)
    Z = rng.normal(size=(8, 3))
    Q = ortho_group.rvs(3, random_state=7)
    a, b = exact_min_sse(Z, 3), exact_min_sse(Z @ Q, 3)
    assert a.objective == pytest.approx(b.objective, rel=1e-10)


def test_empty_parts_and_separation():
    Z = np.zeros((4, 2))
    exact = exact_min_sse(Z, 3)
    assert exact.objective == 0.0
    assert np.isnan(exact.centroids[exact.part_sizes == 0]).all()
    assert centroid_separation(exact) == np.inf
    c = lloyd_cluster(Z, 3, restarts=3, seed=0)
    assert (c.part_sizes > 0).all()  # Lloyd reseeds empty parts
    assert centroid_separation(c) == 0.0


def test_lloyd_determinism_and_history():
    Z = np.random.default_rng(6).normal(size=(60, 3))
    a = lloyd_cluster(Z, 4, restarts=8, seed=Seed(1, 2))
    b = lloyd_cluster(Z, 4, restarts=8, seed=Seed(1, 2))
    assert np.array_equal(a.assignment, b.assignment) and a.objective == b.objective
    assert all(x >= y - 1e-12 for x, y in zip(a.history, a.history[1:]))
    assert a.history[-1] == a.objective


def test_canonical_labels():
    assert assignment_from_clustering(np.array([2, 2, 2])).tolist() == [0, 0, 0]
    assert assignment_from_clustering(np.array([1, 1, 0, 0])).tolist() == [0, 0, 1, 1]
    assert assignment_from_clustering(np.array([3, 0, 3, 2])).tolist() == [0, 1, 0, 2]


def test_estimator_api():
    Z = np.array([[0, 0], [0, 1], [10, 0], [10, 1]], dtype=float)
    est = LeastSquaresKMeans(n_clusters=2, restarts=5, random_state=0).fit(Z)
    assert est.inertia_ == pytest.approx(1.0)
    assert np.array_equal(est.predict(Z), est.labels_)
    assert np.array_equal(est.fit_predict(Z), est.labels_)
    exact = LeastSquaresKMeans(n_clusters=2, method="exact").fit(Z)
    assert exact.inertia_ == pytest.approx(1.0)
    with pytest.raises(ValueError):
        LeastSquaresKMeans(method="spectral").fit(Z)


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(2, 7), st.integers(1, 3)),
              elements=st.floats(-10, 10, allow_nan=False)),
       st.integers(1, 4))
def test_objective_properties(Z, k):
    k = min(k, Z.shape[0])
    exact = exact_min_sse(Z, k)
    lloyd = lloyd_cluster(Z, k, restarts=10, seed=0)
    total = float(((Z - Z.mean(0)) ** 2).sum())
    assert -1e-9 <= exact.objective <= total * (1 + 1e-12) + 1e-9
    assert lloyd.objective >= exact.objective - 1e-9 * max(1.0, total)
    # objective equals the within-part sum of squares of its own assignment
    C = lloyd.C
    assert lloyd.objective == pytest.approx(float(((Z - C) ** 2).sum()), rel=1e-9, abs=1e-9)
    # more parts never hurt the exact optimum
    if k < Z.shape[0]:
        assert exact_min_sse(Z, k + 1).objective <= exact.objective + 1e-9 * max(1.0, total)
