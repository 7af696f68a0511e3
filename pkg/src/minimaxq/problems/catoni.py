"""A heavy-atom law on which the sample mean has a poor upper tail."""

from __future__ import annotations

import math

import numpy as np

from ..bounds import SQUARE, LossModel, le_cam_kl_quantile_lb
from ..divergences import DiscreteDist
from ..estimators import EstimatorSpec
from .base import Hypothesis, ProblemInstance, kl_budget

# chance that at least one heavy atom shows up, as a multiple of delta
HEAVY_HIT_FACTOR = 1.5


def catoni_law(n, sigma, delta):
    """Mean-zero, variance-sigma^2 two-point law with a rare heavy atom.

    The heavy atom sigma sqrt((1 - p)/p) has mass p = 1 - (1 - 1.5 delta)^{1/n},
    so a sample of size n contains it with probability 1.5 delta.  One heavy
    draw moves the sample mean by about sigma / (n sqrt(p)), giving squared
    error near sigma^2 / (1.5 n delta) > sigma^2 / (e n delta).
    """
    p = -math.expm1(math.log1p(-HEAVY_HIT_FACTOR * delta) / n)
    heavy = sigma * math.sqrt((1 - p) / p)
    light = -sigma * math.sqrt(p / (1 - p))
    return DiscreteDist([light, heavy], [1 - p, p]), p


def catoni_adversary(n, sigma=1.0, delta=0.01):
    """Scalar mean estimation on ``catoni_law`` under squared error.

    The lower bound is the Gaussian two-point bound sigma^2 log(1/(4 delta
    (1 - delta))) / (4n), which holds over any class containing the normal
    laws of variance sigma^2.  ``extras`` carries the sample-mean tail floor
    sigma^2 / (e n delta).
    """
    if not 0 < delta <= 1 / math.e:
        raise ValueError("delta must lie in (0, 1/e]")
    n = int(n)
    if n < 1:
        raise ValueError("n must be positive")
    law, p = catoni_law(n, sigma, delta)
    loss = LossModel("absolute", SQUARE, A=2.0)
    hyps = [Hypothesis(0.0, law, "heavy_atom")]

    def lb(level):
        return sigma**2 * kl_budget(level) / (4 * n)

    def ub(level):
        return 100 * sigma**2 * math.log(1 / level) / n

    def certificates(level):
        # N(0, sigma^2) against N(mu, sigma^2) with n mu^2 / (2 sigma^2) half the budget
        mu = sigma * math.sqrt(kl_budget(level) / n)
        cert = le_cam_kl_quantile_lb(n * mu**2 / (2 * sigma**2), mu / 2, SQUARE, level, "Gaussian pair")
        return [cert] if cert is not None else []

    def engine_lb(level):
        return max(c.value for c in certificates(level))

    def sample(index, m, rng):
        return law.sample(m, rng)

    return ProblemInstance(
        name="catoni_adversary",
        params={"n": n, "sigma": sigma, "delta": delta, "p": p},
        hypotheses=hyps,
        loss=loss,
        lb_fn=lb,
        lb_delta_max=1 / math.e,
        ub_fn=ub,
        sampler=sample,
        default_estimator=EstimatorSpec("median_of_means"),
        context={"delta": delta},
        sim_hypotheses=[0],
        certificates=certificates,
        engine_lb=engine_lb,
        dim=1,
        notes="calibrated stand-in law, checked by simulation",
        extras={"sample_mean_floor": sigma**2 / (math.e * n * delta)},
    )
