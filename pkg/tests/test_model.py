import math

import numpy as np
import pytest

from blockspec.exceptions import EntryOutOfRange, NotIdentifiable, RhoInvalid, SymmetryViolation
from blockspec.model import (
    SbmParams,
    compute_constants,
    dump_params,
    factorize,
    load_params,
    numerical_rank,
    resolve_params,
    validate_params,
)


def test_param1_is_valid(param1):
    assert validate_params(param1) is param1
    assert param1.K == 3 and param1.S == 1 and not param1.directed


def test_identical_blocks_not_identifiable():
    with pytest.raises(NotIdentifiable):
        validate_params(SbmParams(2, [0.5, 0.5], [[[0.5, 0.5], [0.5, 0.5]]]))


def test_second_modality_restores_identifiability():
    same = [[0.5, 0.5], [0.5, 0.5]]
    diff = [[0.9, 0.1], [0.1, 0.9]]
    validate_params(SbmParams(2, [0.5, 0.5], [same, diff]))


@pytest.mark.parametrize("rho", [[0.6, 0.5], [1.0, 0.0], [0.5]])
def test_bad_rho(rho):
    with pytest.raises(RhoInvalid):
        validate_params(SbmParams(2, rho, [[[0.9, 0.1], [0.1, 0.9]]]))


def test_entry_range_and_symmetry():
    with pytest.raises(EntryOutOfRange):
        validate_params(SbmParams(2, [0.5, 0.5], [[[1.2, 0.1], [0.1, 0.9]]]))
    with pytest.raises(SymmetryViolation):
        validate_params(SbmParams(2, [0.5, 0.5], [[[0.9, 0.2], [0.1, 0.9]]]))
    validate_params(SbmParams(2, [0.5, 0.5], [[[0.9, 0.2], [0.1, 0.9]]], directed=True))


def test_numerical_rank(param1, kest):
    assert numerical_rank(param1.M) == 2
    assert numerical_rank(np.eye(3)) == 3
    assert numerical_rank(kest.M) == 3
    assert numerical_rank(np.zeros((2, 2))) == 0


def test_factorize_constant_matrix():
    f = factorize(np.full((2, 2), 0.5))
    assert f.mu.shape == (2, 1) and f.nu.shape == (2, 1)
    np.testing.assert_allclose(f.mu @ f.nu.T, 0.5, atol=1e-12)


def test_factorize_reconstructs(param1, rng):
    f = factorize(param1.M)
    assert f.rank == 2
    for M in [param1.M, rng.uniform(size=(4, 4)), rng.uniform(size=(5, 2)) @ rng.uniform(size=(2, 5))]:
        f = factorize(M)
        assert np.abs(f.mu @ f.nu.T - M).max() <= 1e-10


def test_alpha_from_rho(param1):
    assert compute_constants(param1).alpha == pytest.approx(0.297, abs=1e-12)


def test_kest_constants_frozen(kest):
    # M = 0.1 J + 0.4 I is PSD, so mu = nu and mu mu^T = M:
    # row distances sqrt(0.5 + 0.5 - 2 * 0.1) and eigenvalues {0.7, 0.4, 0.4}.
    c = compute_constants(kest)
    assert c.beta == pytest.approx(0.99 * math.sqrt(0.8), abs=1e-12)
    assert c.gamma == pytest.approx(0.99 * 0.4, abs=1e-12)
    # regression values for the same quantities
    assert c.beta == pytest.approx(0.8854829190899167, abs=1e-12)
    assert c.gamma == pytest.approx(0.396, abs=1e-12)


def test_constants_independent_oracle(param1, kest):
    from scipy.spatial.distance import pdist

    for params in (param1, kest):
        f = factorize(params.M)
        d = np.concatenate([pdist(f.mu), pdist(f.nu)])
        lam = np.concatenate([np.linalg.eigvals(f.mu.T @ f.mu).real, np.linalg.eigvals(f.nu.T @ f.nu).real])
        c = compute_constants(params)
        assert c.beta == pytest.approx(0.99 * d[d > 1e-10].min(), rel=1e-12)
        assert c.gamma == pytest.approx(0.99 * lam.min(), rel=1e-10)


def test_single_block_beta_infinite():
    c = compute_constants(validate_params(SbmParams(1, [1.0], [[[0.5]]])))
    assert math.isinf(c.beta) and c.beta > 0
    assert c.gamma == pytest.approx(0.99 * 0.5)


def test_params_round_trip(tmp_path, param1):
    dump_params(param1, tmp_path / "p.json")
    back = load_params(tmp_path / "p.json")
    assert back.to_dict() == param1.to_dict()
    np.savetxt(tmp_path / "M.txt", param1.M)
    (tmp_path / "p.yaml").write_text("K: 3\nrho: [0.3, 0.3, 0.4]\nmodalities: [M.txt]\n")
    assert np.array_equal(resolve_params(str(tmp_path / "p.yaml")).M, param1.M)
    assert resolve_params("param1") is param1
