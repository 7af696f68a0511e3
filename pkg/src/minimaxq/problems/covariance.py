"""Covariance estimation in operator norm over matrices of bounded effective rank."""

from __future__ import annotations

import math

import numpy as np

from ..bounds import IDENTITY, LossModel, fano_quantile_lb, le_cam_kl_quantile_lb, matrix_bernstein_cov_bound
from ..divergences import GaussianDist, kl_gaussian, tensorize_kl
from ..estimators import EstimatorSpec
from ..packing import gv_cube_packing
from .base import Hypothesis, ProblemInstance, kl_budget

# pilot: worst ratio 2.18 of empirical quantile to sigma^2 sqrt((r + log(1/delta)) / n)
COV_UB_CONSTANT = 3.0
PACKING_MIN_RANK = 20
PACKING_MAX_RANK = 32


def _embed(block, d):
    out = np.zeros((d, d))
    k = block.shape[0]
    out[:k, :k] = block
    return out


def covariance_opnorm(n, d, sigma, r, delta=0.25):
    """Covariance of N_d(0, Sigma) with ||Sigma|| <= sigma^2 and effective rank <= r.

    Hypotheses 0 and 1 are diag(a^2 sigma^2, sigma^2 I, 0) and diag(sigma^2 I, 0)
    on the leading floor(r) coordinates.  For floor(r) in [20, 32] the packing
    family sigma^2/2 I + b phi phi^T follows.
    """
    n, d = int(n), int(d)
    if not 1 <= r <= min(n, d):
        raise ValueError("r must lie in [1, min(n, d)]")
    r0 = int(math.floor(r))
    s2 = sigma**2
    loss = LossModel("operator", IDENTITY, A=1.0)
    floor_level = math.exp(-n) / 3

    def pair(level):
        level = max(level, floor_level)
        a = 1 - math.sqrt(kl_budget(level) / (4 * n))
        first = s2 * np.eye(r0)
        first[0, 0] = a**2 * s2
        return _embed(first, d), _embed(s2 * np.eye(r0), d), level

    S1, S2, _ = pair(delta)
    hyps = [Hypothesis(S1, GaussianDist(np.zeros(d), S1), "two_point"), Hypothesis(S2, GaussianDist(np.zeros(d), S2), "two_point")]

    b = s2 / (6 * math.sqrt(n * r0))
    words = None
    if PACKING_MIN_RANK <= r0 <= PACKING_MAX_RANK:
        words = gv_cube_packing(r0).words.astype(float)
        for phi in words:
            S = _embed(s2 / 2 * np.eye(r0) + b * np.outer(phi, phi), d)
            hyps.append(Hypothesis(S, GaussianDist(np.zeros(d), S), "packing"))

    def lb(level):
        two_point = s2 / 9 * min(math.sqrt(math.log(1 / level) / n), 1.0)
        if r0 >= PACKING_MIN_RANK:
            return max(two_point, s2 * math.sqrt(r / n) / 800)
        return two_point

    def ub(level):
        if level >= math.exp(-n):
            return COV_UB_CONSTANT * s2 * math.sqrt((r + math.log(1 / level)) / n)
        return s2

    def bernstein(level):
        return matrix_bernstein_cov_bound(s2, r0, n, d, level)

    def packing_certificate():
        if r0 < PACKING_MIN_RANK:
            return None
        ref = GaussianDist(np.zeros(r0), s2 / 2 * np.eye(r0))
        if words is not None:
            kls = [
                tensorize_kl(kl_gaussian(GaussianDist(np.zeros(r0), s2 / 2 * np.eye(r0) + b * np.outer(w, w)), ref), n)
                for w in words
            ]
            sep = min(
                np.abs(np.linalg.eigvalsh(b * (np.outer(words[i], words[i]) - np.outer(words[j], words[j])))).max()
                for i in range(len(words))
                for j in range(i + 1, len(words))
            )
            note = f"greedy cube packing, {len(words)} words"
        else:
            # too large to enumerate: worst-case KL at ||phi||^2 = r0 and the guaranteed count
            x = 2 * b * r0 / s2
            M = math.ceil(math.exp(r0 / 8))
            kls = [n / 2 * (x - math.log1p(x))] * M
            sep = b * (r0 / 8) ** 2 / r0
            note = f"cube packing of guaranteed size {M}"
        return fano_quantile_lb(kls, sep / 2, IDENTITY, note)

    def certificates(level):
        A, B, used = pair(level)
        kl = tensorize_kl(kl_gaussian(GaussianDist(np.zeros(r0), A[:r0, :r0]), GaussianDist(np.zeros(r0), B[:r0, :r0])), n)
        certs = [le_cam_kl_quantile_lb(kl, loss.distance(A, B) / 2, IDENTITY, used, "scaled leading variance")]
        packed = packing_certificate()
        if packed is not None:
            certs.append(packed)
        return [c for c in certs if c is not None]

    def engine_lb(level):
        # below the floor level the pair built at the floor still certifies
        return max(c.value for c in certificates(level) if level <= floor_level or c.valid_at(level))

    return ProblemInstance(
        name="covariance_opnorm",
        params={"n": n, "d": d, "sigma": sigma, "r": r, "delta": delta},
        hypotheses=hyps,
        loss=loss,
        lb_fn=lb,
        lb_delta_max=0.25,
        ub_fn=ub,
        sampler=lambda index, m, rng: hyps[index].dist.sample(m, rng),
        default_estimator=EstimatorSpec("sample_cov"),
        sim_hypotheses=[1],
        certificates=certificates,
        engine_lb=engine_lb,
        dim=d,
        notes="upper bound uses a fitted constant and is not certified",
        extras={"bernstein_ub": bernstein, "ub_constant": COV_UB_CONSTANT},
    )
