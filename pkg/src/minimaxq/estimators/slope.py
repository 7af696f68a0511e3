"""Sorted-l1 penalised least squares."""

import math
from dataclasses import dataclass, field

import numpy as np


def prox_sorted_l1(z, lam):
    """Proximal operator of the sorted-l1 norm sum_j lam_j |x|_(j).

    Parameters
    ----------
    z : array_like, shape (d,)
    lam : array_like, shape (d,)
        Nonincreasing, nonnegative weights.

    Returns
    -------
    ndarray, shape (d,)
        argmin_x 0.5 ||x - z||^2 + sum_j lam_j |x|_(j), where |x|_(1) >= ... are
        the sorted absolute values.
    """
    z = np.asarray(z, dtype=float).ravel()
    lam = np.asarray(lam, dtype=float).ravel()
    if lam.shape != z.shape:
        raise ValueError("z and lam must have the same length")
    if np.any(lam < 0) or np.any(np.diff(lam) > 0):
        raise ValueError("lam must be nonnegative and nonincreasing")
    sign = np.sign(z)
    a = np.abs(z)
    order = np.argsort(-a, kind="stable")
    w = a[order] - lam
    # pool adjacent blocks until the block means are nonincreasing
    d = w.shape[0]
    sums = np.empty(d)
    starts = np.empty(d, dtype=np.int64)
    ends = np.empty(d, dtype=np.int64)
    top = -1
    for i in range(d):
        top += 1
        sums[top], starts[top], ends[top] = w[i], i, i
        while top > 0 and sums[top - 1] / (ends[top - 1] - starts[top - 1] + 1) <= sums[top] / (ends[top] - starts[top] + 1):
            sums[top - 1] += sums[top]
            ends[top - 1] = ends[top]
            top -= 1
    x_sorted = np.empty(d)
    for b in range(top + 1):
        x_sorted[starts[b] : ends[b] + 1] = max(sums[b] / (ends[b] - starts[b] + 1), 0.0)
    x = np.empty(d)
    x[order] = x_sorted
    return sign * x


def sorted_l1_norm(x, lam):
    return float(np.sort(np.abs(x))[::-1] @ lam)


def slope_weights(d, n, sigma, weight_scale=6.0):
    """lam_j = weight_scale * sigma * sqrt(log(2d / j) / n)."""
    j = np.arange(1, d + 1)
    return weight_scale * sigma * np.sqrt(np.log(2 * d / j) / n)


def _power_iteration(X, iters=500, tol=1e-12):
    v = np.ones(X.shape[1]) / math.sqrt(X.shape[1])
    est = 0.0
    for _ in range(iters):
        u = X.T @ (X @ v)
        norm = np.linalg.norm(u)
        if norm == 0:
            return 0.0
        v = u / norm
        if abs(norm - est) <= tol * norm:
            break
        est = norm
    return float(norm)


@dataclass
class SlopeFit:
    coef: np.ndarray
    converged: bool
    n_iter: int
    objective: list = field(default_factory=list)


def slope(X, y, sigma, weight_scale=6.0, tol=1e-10, max_iter=100_000, return_info=False):
    """SLOPE estimate by proximal gradient with step 1/L.

    Minimises (2n)^{-1} ||y - X theta||^2 + sum_j lam_j |theta|_(j) with the
    weights of :func:`slope_weights`.  Iteration stops when the objective
    changes by less than ``tol``.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    n, d = X.shape
    lam = slope_weights(d, n, sigma, weight_scale)
    L = _power_iteration(X) / n
    theta = np.zeros(d)

    def objective(t):
        r = y - X @ t
        return 0.5 * (r @ r) / n + sorted_l1_norm(t, lam)

    history = [objective(theta)]
    converged = False
    it = 0
    if L > 0:
        step = 1.0 / L
        for it in range(1, max_iter + 1):
            grad = X.T @ (X @ theta - y) / n
            theta = prox_sorted_l1(theta - step * grad, step * lam)
            history.append(objective(theta))
            if abs(history[-2] - history[-1]) < tol:
                converged = True
                break
    else:
        converged = True
    if return_info:
        return SlopeFit(theta, converged, it, history)
    return theta
