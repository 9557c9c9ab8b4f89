"""Input checking shared by the estimators and the functional API."""

from __future__ import annotations

import numpy as np
from sklearn.utils import check_array

from .exceptions import DimensionError, EmptyInput, LengthMismatch


def check_adjacency(A, *, name="A") -> np.ndarray:
    """Return ``A`` as a float64 square 0/1 matrix with a zero diagonal."""
    A = check_array(A, dtype=np.float64, ensure_min_samples=1, ensure_min_features=1,
                    input_name=name)
    if A.shape[0] != A.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {A.shape}")
    if not np.isin(A, (0.0, 1.0)).all():
        raise ValueError(f"{name} must contain only 0/1 entries")
    if np.any(np.diag(A) != 0):
        raise ValueError(f"{name} must have a zero diagonal (no self-loops)")
    return A


def check_modalities(graphs) -> list[np.ndarray]:
    """Accept one adjacency matrix, a list of them, or an (S, n, n) array."""
    if isinstance(graphs, np.ndarray) and graphs.ndim == 2:
        graphs = [graphs]
    elif isinstance(graphs, np.ndarray) and graphs.ndim == 3:
        graphs = list(graphs)
    elif hasattr(graphs, "adjacency"):
        graphs = list(graphs.adjacency)
    graphs = list(graphs)
    if not graphs:
        raise EmptyInput("at least one adjacency matrix is required")
    out = [check_adjacency(A, name=f"A[{s}]") for s, A in enumerate(graphs)]
    n = out[0].shape[0]
    if any(A.shape[0] != n for A in out):
        raise DimensionError("all modalities must share the same vertex count")
    return out


def check_labels(tau_true, tau_pred) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(tau_true)
    b = np.asarray(tau_pred)
    if a.ndim != 1 or b.ndim != 1:
        raise ValueError("label vectors must be one-dimensional")
    if a.shape[0] != b.shape[0]:
        raise LengthMismatch(f"label vectors differ in length: {a.shape[0]} vs {b.shape[0]}")
    return a, b


def per_modality(value, n_modalities: int, *, name: str) -> list[int]:
    """Broadcast an int (or validate a sequence) to one entry per modality."""
    if np.isscalar(value):
        values = [int(value)] * n_modalities
    else:
        values = [int(v) for v in value]
    if len(values) != n_modalities:
        raise ValueError(f"{name} needs {n_modalities} entries, got {len(values)}")
    if any(v < 1 for v in values):
        raise ValueError(f"{name} entries must be positive, got {values}")
    return values
