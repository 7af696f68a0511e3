"""Projected stochastic subgradient descent with gradient clipping."""

import math

import numpy as np


def project_ball(x, R):
    norm = np.linalg.norm(x)
    return x if norm <= R else x * (R / norm)


def clip_norm(g, tau):
    norm = np.linalg.norm(g)
    return g if norm <= tau else g * (tau / norm)


def default_schedule(T, gamma, R, delta):
    """Step R / (gamma sqrt(T)) and clip level max(gamma, gamma sqrt(T / log(1/delta)))."""
    step = R / (gamma * math.sqrt(T))
    tau = max(gamma, gamma * math.sqrt(T / math.log(1 / delta)))
    return step, tau


def clipped_sgd(oracle, T, R, step, tau, x0=None, dim=1, callback=None):
    """Average iterate of clipped projected SGD on the ball of radius ``R``.

    Parameters
    ----------
    oracle : callable
        ``oracle(x, t)`` returns a stochastic subgradient at ``x`` for step ``t``.
    T : int
        Number of steps.
    R, step, tau : float
        Ball radius, step size and clipping level.
    x0 : array_like, optional
        Starting point, the origin by default.
    callback : callable, optional
        Called with every iterate, including the start.
    """
    if T < 1:
        raise ValueError("T must be at least 1")
    x = np.zeros(dim) if x0 is None else project_ball(np.asarray(x0, dtype=float).ravel(), R)
    total = np.zeros_like(x)
    for t in range(T):
        if callback is not None:
            callback(x)
        total += x
        g = clip_norm(np.asarray(oracle(x, t), dtype=float).ravel(), tau)
        x = project_ball(x - step * g, R)
    if callback is not None:
        callback(x)
    return total / T
