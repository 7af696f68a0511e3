"""Stochastic convex optimisation with Lipschitz losses over a ball."""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import brentq

from ..bounds import IDENTITY, le_cam_kl_quantile_lb
from ..divergences import DiscreteDist
from ..estimators import EstimatorSpec
from .base import Hypothesis, ProblemInstance, kl_budget

_S_MAX = 1 - 1e-15


def bernoulli_kl_gap(x):
    """x log((1 + x) / (1 - x)), the KL between Ber((1 + x)/2) and Ber((1 - x)/2)."""
    return x * (math.log1p(x) - math.log1p(-x))


def invert_kl_gap(target):
    """The unique s in [0, 1) with ``bernoulli_kl_gap(s) = target``."""
    if target < 0:
        raise ValueError("target must be nonnegative")
    if target == 0:
        return 0.0
    if bernoulli_kl_gap(_S_MAX) <= target:
        return _S_MAX
    return brentq(lambda x: bernoulli_kl_gap(x) - target, 0.0, _S_MAX, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def population_objective(x, p, gamma, R):
    """E f(x, Y) for f(x, y) = gamma |x + y R| and P(Y = 1) = p."""
    return gamma * (p * abs(x + R) + (1 - p) * abs(x - R))


def optimality_gap(x, p, gamma, R):
    """F_P(x) - inf F_P; the infimum sits at -R when p >= 1/2 and at R otherwise."""
    return population_objective(x, p, gamma, R) - 2 * gamma * R * min(p, 1 - p)


def sco_hard_instance(T, gamma=1.0, R=1.0, delta=0.25):
    """Two Bernoulli label laws for f(x, y) = gamma |x + y R| on the interval [-R, R].

    Hypothesis parameters are P(Y = 1) = (1 + s)/2 and (1 - s)/2, with s chosen
    so that T times the per-sample KL equals half the Le Cam budget at
    ``delta``.  The loss of a point x under hypothesis p is its optimality gap.
    """
    T = int(T)
    if T < 1:
        raise ValueError("T must be at least 1")

    def strength(level):
        return invert_kl_gap(kl_budget(level) / (2 * T))

    s = strength(delta)
    hyps = [Hypothesis((1 + s) / 2, DiscreteDist([-1.0, 1.0], [(1 - s) / 2, (1 + s) / 2]), "two_point")]
    hyps.append(Hypothesis((1 - s) / 2, DiscreteDist([-1.0, 1.0], [(1 + s) / 2, (1 - s) / 2]), "two_point"))

    def loss(x, p):
        return optimality_gap(float(np.ravel(x)[0]), p, gamma, R)

    def lb(level):
        return gamma * R / math.sqrt(30) * min(math.sqrt(math.log(1 / level) / T), 1.0)

    def ub(level):
        return min(20 * gamma * R * math.sqrt(math.log(1 / level) / T), 2 * gamma * R)

    def separation(level):
        # F_P1(0) - min F_P1 for the pair built at this level
        p = (1 + strength(level)) / 2
        return optimality_gap(0.0, p, gamma, R)

    def certificates(level):
        s_ = strength(level)
        cert = le_cam_kl_quantile_lb(T * bernoulli_kl_gap(s_), separation(level), IDENTITY, level, "label pair")
        return [cert] if cert is not None else []

    def engine_lb(level):
        return max(c.value for c in certificates(level))

    def sample(index, m, rng):
        return np.where(rng.random(m) < hyps[index].param, 1.0, -1.0)

    def subgradient(x, y):
        return gamma * np.sign(x + y * R)

    return ProblemInstance(
        name="sco_hard_instance",
        params={"T": T, "gamma": gamma, "R": R, "delta": delta, "s": s},
        hypotheses=hyps,
        loss=loss,
        lb_fn=lb,
        lb_delta_max=0.25,
        ub_fn=ub,
        sampler=sample,
        default_estimator=EstimatorSpec("clipped_sgd"),
        context={"R": R, "gamma": gamma, "delta": delta, "subgradient": subgradient, "dim": 1},
        sim_hypotheses=[0],
        certificates=certificates,
        engine_lb=engine_lb,
        dim=1,
        notes="upper bound constant 20 is a generous test bound",
        extras={"separation": separation},
    )
