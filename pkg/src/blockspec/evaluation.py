"""Misassignment counts: disagreements between true and estimated labels,
minimized over relabelings of the estimate."""

from __future__ import annotations

import numpy as np
from scipy.optimize import linear_sum_assignment

from ._validation import check_labels


def confusion_matrix(tau, tau_hat) -> np.ndarray:
    """``counts[k, l] = #{j : tau[j] = k, tau_hat[j] = l}`` over the observed label ranges."""
    tau, tau_hat = check_labels(tau, tau_hat)
    if tau.size == 0:
        return np.zeros((0, 0), dtype=np.int64)
    _, a = np.unique(tau, return_inverse=True)
    _, b = np.unique(tau_hat, return_inverse=True)
    counts = np.zeros((a.max() + 1, b.max() + 1), dtype=np.int64)
    np.add.at(counts, (a, b), 1)
    return counts


def max_agreement(counts) -> int:
    """Largest total of ``counts`` over one-to-one row/column matchings.

    Rectangular inputs are zero-padded to square, which is the same as
    matching surplus labels to dummy labels.
    """
    counts = np.asarray(counts)
    if counts.size == 0:
        return 0
    m = max(counts.shape)
    square = np.zeros((m, m), dtype=counts.dtype)
    square[: counts.shape[0], : counts.shape[1]] = counts
    rows, cols = linear_sum_assignment(square, maximize=True)
    return int(square[rows, cols].sum())


def misassignment_count(tau, tau_hat) -> int:
    tau, tau_hat = check_labels(tau, tau_hat)
    return int(tau.shape[0] - max_agreement(confusion_matrix(tau, tau_hat)))


def misassignment_fraction(tau, tau_hat) -> float:
    tau, tau_hat = check_labels(tau, tau_hat)
    if tau.shape[0] == 0:
        return 0.0
    return misassignment_count(tau, tau_hat) / tau.shape[0]
