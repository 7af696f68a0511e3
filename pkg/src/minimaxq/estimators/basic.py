"""Location and scatter estimators."""

import math

import numpy as np


def _rows(data):
    data = np.asarray(data, dtype=float)
    if data.shape[0] == 0:
        raise ValueError("empty dataset")
    return data


def sample_mean(data):
    """Coordinatewise average of the rows of ``data``."""
    return _rows(data).mean(axis=0)


def median_of_means(data, k):
    """Median of ``k`` block means.

    Blocks are contiguous runs of ``n // k`` samples; leftover samples at the
    end are dropped.
    """
    data = _rows(data).ravel()
    n = data.shape[0]
    k = int(k)
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    m = n // k
    return float(np.median(data[: k * m].reshape(k, m).mean(axis=1)))


def mom_blocks(delta, factor=8.0):
    """Block count ceil(factor * log(1 / delta))."""
    return max(1, math.ceil(factor * math.log(1 / delta)))


def sample_covariance(data):
    """Uncentred second-moment matrix n^{-1} sum_i x_i x_i^T."""
    data = _rows(data)
    if data.ndim == 1:
        data = data[:, None]
    return data.T @ data / data.shape[0]


def zero_covariance(d):
    return np.zeros((d, d))
