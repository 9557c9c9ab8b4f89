"""Empirical checks of finite-sample spectral bounds on sampled graphs.

These use the ground-truth labels and communication matrix to build the
noiseless probability matrix ``P`` (``P[i, j] = M[tau[i], tau[j]]``, diagonal
included), so they sit outside the inference path.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .embedding import full_svd, singular_values
from .exceptions import DimensionError, NotOrthonormal
from .model import ModelConstants, SbmParams, compute_constants, factorize, numerical_rank


@dataclass(frozen=True)
class BoundReport:
    """``holds`` is ``lhs <= rhs``; lower bounds are stated with the bound as ``lhs``."""

    name: str
    lhs: float
    rhs: float
    n: int
    seed: str = ""
    params: str = ""

    @property
    def holds(self) -> bool:
        return bool(self.lhs <= self.rhs)

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    def as_record(self) -> dict:
        d = asdict(self)
        d.update(holds=self.holds, margin=self.margin)
        return d


REPORT_COLUMNS = ["name", "n", "lhs", "rhs", "holds", "margin", "seed", "params"]


def probability_matrix(tau, M) -> np.ndarray:
    tau = np.asarray(tau, dtype=np.int64)
    M = np.asarray(M, dtype=np.float64)
    return M[np.ix_(tau, tau)]


def noiseless_svd(tau, M, rel_tol: float = 1e-10):
    """Singular triples ``(U, s, V)`` of ``P = mu[tau] @ nu[tau].T`` truncated to its rank.

    Computed from thin QR factors of the stacked latent vectors, which keeps
    it O(n r^2) instead of a dense n x n decomposition.
    """
    tau = np.asarray(tau, dtype=np.int64)
    f = factorize(M)
    if f.rank == 0:
        n = tau.shape[0]
        return np.zeros((n, 0)), np.zeros(0), np.zeros((n, 0))
    Q1, R1 = np.linalg.qr(f.mu[tau])
    Q2, R2 = np.linalg.qr(f.nu[tau])
    W, s, Tt = np.linalg.svd(R1 @ R2.T)
    r = int(np.count_nonzero(s > rel_tol * s[0])) if s[0] > 0 else 0
    return Q1 @ W[:, :r], s[:r], Q2 @ Tt[:r].T


def gram_bound(n: int) -> float:
    return math.sqrt(3.0) * n ** 1.5 * math.sqrt(math.log(n))


def spectral_tail_bound(n: int) -> float:
    return 3.0 ** 0.25 * n ** 0.75 * math.log(n) ** 0.25


def procrustes_bound(n: int, constants: ModelConstants) -> float:
    return math.sqrt(6.0) / (constants.alpha ** 2 * constants.gamma ** 2) * math.sqrt(math.log(n) / n)


def check_gram_deviation(A, P, *, seed="", params="") -> list[BoundReport]:
    """Frobenius distance between ``A A^T`` and ``P P^T`` (and the transposed variant)."""
    A = np.asarray(A, dtype=np.float64)
    P = np.asarray(P, dtype=np.float64)
    if A.shape != P.shape or A.shape[0] != A.shape[1]:
        raise DimensionError(f"A and P must be equal square shapes, got {A.shape} and {P.shape}")
    n = A.shape[0]
    if n < 2:
        raise DimensionError("bounds need n >= 2")
    rhs = gram_bound(n)
    left = float(np.linalg.norm(A @ A.T - P @ P.T))
    right = float(np.linalg.norm(A.T @ A - P.T @ P))
    return [
        BoundReport("gram_AAt", left, rhs, n, seed, params),
        BoundReport("gram_AtA", right, rhs, n, seed, params),
    ]


def check_noiseless_spectrum(varsigma, n: int, rank_m: int, constants: ModelConstants, *,
                             seed="", params="") -> list[BoundReport]:
    """Noiseless singular values: ``varsigma_1 <= n`` and ``alpha gamma n <= varsigma_rankM``."""
    varsigma = np.asarray(varsigma, dtype=np.float64)
    reports = [BoundReport("noiseless_top", float(varsigma[0]) if varsigma.size else 0.0, float(n), n, seed, params)]
    if rank_m >= 1:
        low = float(varsigma[rank_m - 1]) if varsigma.size >= rank_m else 0.0
        reports.append(BoundReport("noiseless_lower", constants.alpha * constants.gamma * n, low, n, seed, params))
    return reports


def check_sample_spectrum(sigma, n: int, rank_m: int, constants: ModelConstants | None = None, *,
                     seed="", params="") -> list[BoundReport]:
    """``sigma_1 <= n``; ``alpha gamma n <= sigma_rankM``; ``sigma_{rankM+1} <= 3^(1/4) n^(3/4) log^(1/4) n``.

    The middle report is skipped when ``constants`` is not given.
    """
    sigma = np.asarray(sigma, dtype=np.float64)
    reports = [BoundReport("spectrum_top", float(sigma[0]), float(n), n, seed, params)]
    if constants is not None and rank_m >= 1:
        reports.append(BoundReport("spectrum_lower", constants.alpha * constants.gamma * n,
                                   float(sigma[rank_m - 1]), n, seed, params))
    tail = float(sigma[rank_m]) if sigma.size > rank_m else 0.0
    reports.append(BoundReport("spectrum_tail", tail, spectral_tail_bound(n), n, seed, params))
    return reports


def _check_orthonormal(U, name):
    G = U.T @ U
    if not np.allclose(G, np.eye(G.shape[0]), atol=1e-8, rtol=0):
        raise NotOrthonormal(f"{name} does not have orthonormal columns")


def procrustes_residual(U_noiseless, U_sample) -> float:
    """``min_Q ||U_noiseless Q - U_sample||_F`` over orthogonal ``Q``.

    With ``U_noiseless^T U_sample = W S T^T`` the minimizer is ``Q = W T^T``.
    """
    U0 = np.asarray(U_noiseless, dtype=np.float64)
    U1 = np.asarray(U_sample, dtype=np.float64)
    if U0.shape != U1.shape:
        raise DimensionError(f"shape mismatch {U0.shape} vs {U1.shape}")
    _check_orthonormal(U0, "U_noiseless")
    _check_orthonormal(U1, "U_sample")
    W, _, Tt = np.linalg.svd(U0.T @ U1)
    return float(np.linalg.norm(U0 @ (W @ Tt) - U1))


def check_procrustes(U_noiseless, U_sample, n: int, constants: ModelConstants, *, side="U",
                     seed="", params="") -> BoundReport:
    return BoundReport(f"procrustes_{side}", procrustes_residual(U_noiseless, U_sample),
                       procrustes_bound(n, constants), n, seed, params)


def bound_suite(sample, params: SbmParams, constants: ModelConstants | None = None, *,
                include=("gram", "noiseless", "spectrum", "procrustes"), seed="", label="") -> list[BoundReport]:
    """Every check for every modality of one sampled graph."""
    if constants is None:
        constants = compute_constants(params)
    reports = []
    n = sample.n
    for s, (A, M) in enumerate(zip(sample.adjacency, params.modalities)):
        tag = f"{label}" if params.S == 1 else f"{label}[{s}]"
        r = numerical_rank(M)
        A = A.astype(np.float64)
        U0, vs, V0 = noiseless_svd(sample.tau, M)
        kw = dict(seed=seed, params=tag)
        if "gram" in include:
            reports += check_gram_deviation(A, probability_matrix(sample.tau, M), **kw)
        if "noiseless" in include:
            reports += check_noiseless_spectrum(vs, n, r, constants, **kw)
        if "procrustes" in include:
            sigma, U, V = full_svd(A)
            reports += check_sample_spectrum(sigma, n, r, constants, **kw) if "spectrum" in include else []
            reports.append(check_procrustes(U0, U[:, :r], n, constants, side="U", **kw))
            reports.append(check_procrustes(V0, V[:, :r], n, constants, side="V", **kw))
        elif "spectrum" in include:
            reports += check_sample_spectrum(singular_values(A), n, r, constants, **kw)
    return reports
