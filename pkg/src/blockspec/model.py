"""Stochastic block model parameters and the quantities derived from them.

Nothing here is needed to *run* the partitioning procedure; the latent factors
and the constants ``alpha``, ``beta``, ``gamma`` exist for the diagnostics and
for choosing the tuning constants of the greatest-qualifying-K estimator.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .exceptions import (
    ConfigError,
    DegenerateFactors,
    EntryOutOfRange,
    NotIdentifiable,
    RhoInvalid,
    SymmetryViolation,
)

RHO_TOL = 1e-12
EQUAL_TOL = 1e-10
RANK_TOL = 1e-10
SHRINK = 0.99


@dataclass(frozen=True, eq=False)
class SbmParams:
    """Block count, block probabilities, one communication matrix per modality."""

    K: int
    rho: np.ndarray
    modalities: tuple[np.ndarray, ...]
    directed: bool = False

    def __post_init__(self):
        object.__setattr__(self, "rho", np.asarray(self.rho, dtype=np.float64).reshape(-1))
        mats = tuple(np.atleast_2d(np.asarray(M, dtype=np.float64)) for M in self.modalities)
        object.__setattr__(self, "modalities", mats)
        object.__setattr__(self, "K", int(self.K))
        object.__setattr__(self, "directed", bool(self.directed))

    @property
    def S(self) -> int:
        return len(self.modalities)

    @property
    def M(self) -> np.ndarray:
        """The communication matrix of a single-modality model."""
        if self.S != 1:
            raise AttributeError("M is only defined for single-modality models; use .modalities")
        return self.modalities[0]

    def to_dict(self) -> dict:
        return {
            "K": self.K,
            "rho": self.rho.tolist(),
            "modalities": [M.tolist() for M in self.modalities],
            "directed": self.directed,
        }


@dataclass(frozen=True, eq=False)
class LatentFactors:
    mu: np.ndarray
    nu: np.ndarray

    @property
    def rank(self) -> int:
        return self.mu.shape[1]


@dataclass(frozen=True)
class ModelConstants:
    alpha: float
    beta: float
    gamma: float

    @property
    def separation(self) -> float:
        """``alpha * beta * gamma / 3``, the largest admissible centroid-separation threshold."""
        return self.alpha * self.beta * self.gamma / 3.0


def _distinct_pairs(rows: np.ndarray, tol: float = EQUAL_TOL):
    """Yield distances between every pair of rows that are not equal-valued."""
    K = rows.shape[0]
    for p in range(K):
        for q in range(p + 1, K):
            d = float(np.linalg.norm(rows[p] - rows[q]))
            if d > tol:
                yield p, q, d


def validate_params(raw: SbmParams) -> SbmParams:
    """Check every model invariant; return ``raw`` unchanged if they all hold."""
    K = raw.K
    if K < 1:
        raise RhoInvalid(f"K must be a positive integer, got {K}")
    rho = raw.rho
    if rho.shape != (K,):
        raise RhoInvalid(f"rho must have {K} entries, got {rho.shape[0]}")
    if np.any(rho <= 0) or abs(rho.sum() - 1.0) > RHO_TOL:
        raise RhoInvalid(f"rho must be positive and sum to 1, got {rho.tolist()} (sum {rho.sum()!r})")
    if raw.S < 1:
        raise EntryOutOfRange("at least one communication matrix is required")
    for s, M in enumerate(raw.modalities):
        if M.shape != (K, K):
            raise EntryOutOfRange(f"modality {s}: expected a {K}x{K} matrix, got {M.shape}")
        if not np.all(np.isfinite(M)) or M.min() < 0 or M.max() > 1:
            raise EntryOutOfRange(f"modality {s}: entries must lie in [0, 1]")
        if not raw.directed and not np.array_equal(M, M.T):
            raise SymmetryViolation(f"modality {s}: undirected models need a symmetric matrix")
    for p in range(K):
        for q in range(p + 1, K):
            if not any(
                np.linalg.norm(M[p] - M[q]) > EQUAL_TOL or np.linalg.norm(M[:, p] - M[:, q]) > EQUAL_TOL
                for M in raw.modalities
            ):
                raise NotIdentifiable(f"blocks {p} and {q} are indistinguishable in every modality")
    return raw


def numerical_rank(M, rel_tol: float = RANK_TOL) -> int:
    sv = np.linalg.svd(np.atleast_2d(np.asarray(M, dtype=np.float64)), compute_uv=False)
    if sv.size == 0 or sv[0] == 0:
        return 0
    return int(np.count_nonzero(sv > rel_tol * sv[0]))


def factorize(M, rel_tol: float = RANK_TOL) -> LatentFactors:
    """Split ``M = mu @ nu.T`` with ``mu = U sqrt(S)``, ``nu = V sqrt(S)`` truncated to the numerical rank."""
    M = np.atleast_2d(np.asarray(M, dtype=np.float64))
    U, sv, Vt = np.linalg.svd(M)
    r = numerical_rank(M, rel_tol)
    root = np.sqrt(sv[:r])
    return LatentFactors(mu=U[:, :r] * root, nu=Vt[:r].T * root)


def compute_constants(params: SbmParams, factors: Sequence[LatentFactors] | None = None) -> ModelConstants:
    """Constants sitting a factor 0.99 inside the strict inequalities that define them."""
    if factors is None:
        factors = [factorize(M) for M in params.modalities]
    alpha = SHRINK * float(params.rho.min())

    dists = [d for f in factors for rows in (f.mu, f.nu) for _, _, d in _distinct_pairs(rows)]
    beta = SHRINK * min(dists) if dists else np.inf

    eigs = [np.linalg.eigvalsh(rows.T @ rows) for f in factors for rows in (f.mu, f.nu) if rows.shape[1]]
    if not eigs:
        raise DegenerateFactors("every communication matrix is zero; gamma is undefined")
    gamma = SHRINK * float(min(e.min() for e in eigs))
    if not (beta > 0 and gamma > 0):
        raise DegenerateFactors(f"nonpositive constants beta={beta}, gamma={gamma}")
    return ModelConstants(alpha=alpha, beta=float(beta), gamma=gamma)


# ---------------------------------------------------------------------------
# named parameter sets used by the simulation studies

PARAM1 = SbmParams(
    K=3,
    rho=[0.3, 0.3, 0.4],
    modalities=[[[0.205, 0.045, 0.150], [0.045, 0.205, 0.150], [0.150, 0.150, 0.180]]],
    directed=False,
)

KEST_PARAM = SbmParams(
    K=3,
    rho=[0.3, 0.3, 0.4],
    modalities=[[[0.5, 0.1, 0.1], [0.1, 0.5, 0.1], [0.1, 0.1, 0.5]]],
    directed=False,
)

PRESETS: dict[str, SbmParams] = {"param1": PARAM1, "kest": KEST_PARAM}


def params_from_dict(d: Mapping, base_dir: Path | None = None) -> SbmParams:
    """Build and validate params from a mapping with keys K, rho, modalities, directed.

    A modality may be a nested list or the path of a whitespace-separated text
    matrix (resolved against ``base_dir``).
    """
    missing = {"K", "rho", "modalities"} - set(d)
    if missing:
        raise ConfigError(f"params missing keys: {sorted(missing)}")
    mats = []
    for M in d["modalities"]:
        if isinstance(M, (str, Path)):
            path = Path(M)
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            M = load_matrix_text(path)
        mats.append(M)
    params = SbmParams(K=d["K"], rho=d["rho"], modalities=mats, directed=d.get("directed", False))
    return validate_params(params)


def resolve_params(source, base_dir: Path | None = None) -> SbmParams:
    """Accept a preset name, a mapping, a params file path, or an SbmParams."""
    if isinstance(source, SbmParams):
        return validate_params(source)
    if isinstance(source, Mapping):
        return params_from_dict(source, base_dir)
    if isinstance(source, str) and source in PRESETS:
        return PRESETS[source]
    if isinstance(source, (str, Path)):
        return load_params(source)
    raise ConfigError(f"cannot interpret params specification {source!r}")


def load_params(path) -> SbmParams:
    """Load params from YAML/JSON. A bare text matrix is read as a one-modality
    undirected-if-symmetric model with uniform ``rho``."""
    import yaml

    path = Path(path)
    text = path.read_text()
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError:
        data = None
    if isinstance(data, Mapping):
        if "params" in data and isinstance(data["params"], (Mapping, str)):
            return resolve_params(data["params"], path.parent)
        return params_from_dict(data, path.parent)
    M = load_matrix_text(path)
    K = M.shape[0]
    return validate_params(SbmParams(K=K, rho=np.full(K, 1.0 / K), modalities=[M],
                                     directed=not np.array_equal(M, M.T)))


def load_matrix_text(path) -> np.ndarray:
    return np.atleast_2d(np.loadtxt(path, dtype=np.float64, ndmin=2))


def dump_params(params: SbmParams, path) -> None:
    Path(path).write_text(json.dumps(params.to_dict(), indent=2) + "\n")
