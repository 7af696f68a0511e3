"""Isotonic regression over nondecreasing sequences in [0, 1]."""

from __future__ import annotations

import math

import numpy as np

from ..bounds import LossModel, Transform, le_cam_kl_quantile_lb, risk_to_quantile
from ..estimators import EstimatorSpec
from .base import Hypothesis, ProblemInstance, boosted_certificate, kl_budget

# pilot over 5 signals, n in {100, ..., 3000}: worst ratio 1.20 to n^{-2/3} + log(1/delta)/n
ISO_UB_CONSTANT = 2.0
# local risk bound and diameter range of the cited finite family, per unit n^{-2/3} and n^{1/6}
RISK_CONSTANT = 1 / (2**9 * 3 ** (1 / 3))
DIAMETER_RANGE = (1 / (8 * 3 ** (1 / 6)), 1.0)
EPSILON = 2.0**-6


def isotonic(n, delta=0.25, risk_constant=RISK_CONSTANT, diameter_range=DIAMETER_RANGE):
    """Gaussian sequence model N_n(theta, I) with theta nondecreasing in [0, 1]^n.

    Hypothesis 0 is the ramp theta_i = i / n (used for simulation); 1 and 2 are
    the constant pair 0 and sqrt(log(1/(4 delta (1 - delta))) / n) 1_n.  The
    n^{-2/3} piece of the lower bound comes from a local risk bound
    ``risk_constant * n^{-2/3}`` over a family of diameter in
    ``diameter_range * n^{1/6}``, turned into a quantile bound and boosted.
    """
    n = int(n)
    if n < 2:
        raise ValueError("n must be at least 2")
    loss = LossModel("euclidean", Transform("square", scale=1 / n), A=2.0)
    floor_level = math.exp(-n) / 3

    def pair(level):
        level = max(level, floor_level)
        return np.zeros(n), math.sqrt(kl_budget(level) / n) * np.ones(n), level

    t1, t2, _ = pair(delta)
    ramp = np.arange(1, n + 1) / n
    hyps = [Hypothesis(ramp, None, "ramp"), Hypothesis(t1, None, "two_point"), Hypothesis(t2, None, "two_point")]

    def lb(level):
        return max(min(math.log(1 / level) / n, 1.0) / 20, n ** (-2 / 3) / (2**26 * 3**3))

    def ub(level):
        return min(ISO_UB_CONSTANT * (n ** (-2 / 3) + math.log(1 / level) / n), 1.0)

    def risk_at(rep):
        # rep independent copies of each observation act like noise variance 1/rep
        Delta = risk_constant * n ** (-2 / 3) * rep ** (-2 / 3)
        lo, hi = (c * n ** (1 / 6) * rep ** (-1 / 3) for c in diameter_range)
        return risk_to_quantile(Delta, lo, loss.g, EPSILON, D_upper=hi, note="cited local family")

    boosted = boosted_certificate(risk_at, 0.25, loss.A, "cited local family")

    def certificates(level):
        a, b, used = pair(level)
        kl = n * float(b[0]) ** 2 / 2
        certs = [le_cam_kl_quantile_lb(kl, loss.distance(a, b) / 2, loss.g, used, "constant pair")]
        if boosted is not None:
            certs.append(boosted)
        return [c for c in certs if c is not None]

    def engine_lb(level):
        return max(c.value for c in certificates(level) if level <= floor_level or c.valid_at(level))

    def sample(index, m, rng):
        if m != n:
            raise ValueError("the sequence length fixes the sample size")
        return hyps[index].param + rng.standard_normal(n)

    return ProblemInstance(
        name="isotonic",
        params={"n": n, "delta": delta},
        hypotheses=hyps,
        loss=loss,
        lb_fn=lb,
        lb_delta_max=0.25,
        ub_fn=ub,
        sampler=sample,
        default_estimator=EstimatorSpec("isotonic_clipped"),
        sim_hypotheses=[0],
        certificates=certificates,
        engine_lb=engine_lb,
        dim=n,
        notes="upper bound uses a fitted constant and is not certified",
        extras={"ub_constant": ISO_UB_CONSTANT, "boosted": boosted},
    )
