"""Isotonic least squares by pool-adjacent-violators."""

import numpy as np


def pava(y, weights=None):
    """L2 projection of ``y`` onto the nondecreasing cone.

    Parameters
    ----------
    y : array_like, shape (n,)
    weights : array_like, optional
        Positive observation weights.

    Returns
    -------
    ndarray, shape (n,)
    """
    y = np.asarray(y, dtype=float).ravel()
    n = y.shape[0]
    if n == 0:
        raise ValueError("empty input")
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float).ravel()
    # each block keeps (weighted mean, total weight, length)
    means = np.empty(n)
    totals = np.empty(n)
    lengths = np.empty(n, dtype=np.int64)
    top = -1
    for i in range(n):
        top += 1
        means[top], totals[top], lengths[top] = y[i], w[i], 1
        while top > 0 and means[top - 1] > means[top]:
            wt = totals[top - 1] + totals[top]
            means[top - 1] = (totals[top - 1] * means[top - 1] + totals[top] * means[top]) / wt
            totals[top - 1] = wt
            lengths[top - 1] += lengths[top]
            top -= 1
    return np.repeat(means[: top + 1], lengths[: top + 1])


def isotonic_clipped(y, lower=0.0, upper=1.0):
    """Isotonic fit of ``y`` clipped coordinatewise to ``[lower, upper]``."""
    return np.clip(pava(y), lower, upper)
