"""Mean estimation under Gaussian and contaminated models."""

from __future__ import annotations

import itertools
import math

import numpy as np

from ..bounds import (
    IDENTITY,
    SQUARE,
    LossModel,
    assouad_risk_lb,
    fano_quantile_lb,
    huber_modulus_lb,
    le_cam_kl_quantile_lb,
    risk_to_quantile,
)
from ..divergences import DiscreteDist, GaussianDist, kl_gaussian, pinsker_tv_bound, tensorize_kl, tv_discrete
from ..estimators import EstimatorSpec
from ..exceptions import DomainError
from .base import Hypothesis, ProblemInstance, boosted_certificate, halves, kl_budget

CUBE_MAX_DIM = 8


def _spectrum(Sigma):
    Sigma = np.atleast_2d(np.asarray(Sigma, dtype=float))
    if not np.allclose(Sigma, Sigma.T, atol=1e-10):
        raise DomainError("Sigma must be symmetric")
    evals, evecs = np.linalg.eigh(Sigma)
    if evals.min() <= 0:
        raise DomainError("Sigma must be positive definite")
    order = np.argsort(-evals)
    return Sigma, evals[order], evecs[:, order]


def _gaussian_sampler(hypotheses):
    def sample(index, n, rng):
        return hypotheses[index].dist.sample(n, rng)

    return sample


def gaussian_mean_sq(n, Sigma, delta=0.25):
    """Mean of N_d(theta, Sigma) under squared Euclidean loss.

    Hypotheses: the two-point pair built for level ``delta`` (indices 0, 1) and,
    for d <= 8, the Assouad cube with side lengths (4/3) sqrt(lambda_j / n).
    """
    Sigma, evals, evecs = _spectrum(Sigma)
    d = Sigma.shape[0]
    tr, op = float(evals.sum()), float(evals[0])
    loss = LossModel("euclidean", SQUARE, A=2.0)

    def pair(level):
        shift = math.sqrt(evals[0] * kl_budget(level) / n) * evecs[:, 0]
        return np.zeros(d), shift

    hyps = [Hypothesis(t, GaussianDist(t, Sigma), "two_point") for t in pair(delta)]
    if d <= CUBE_MAX_DIM:
        sides = (4 / 3) * np.sqrt(evals / n)
        for omega in itertools.product((0, 1), repeat=d):
            theta = evecs @ (np.asarray(omega) * sides)
            hyps.append(Hypothesis(theta, GaussianDist(theta, Sigma), "cube"))

    def lb(level):
        return tr / (2**7 * 3**2 * 5**2 * n) + op * math.log(1 / level) / (40 * n)

    def ub(level):
        return 2 * tr / n + 4 * op * math.log(1 / level) / n

    def assouad_at(rep):
        m = rep * n
        sides = (4 / 3) * np.sqrt(evals / m)
        base = GaussianDist(np.zeros(d), Sigma)
        tvs = [
            pinsker_tv_bound(tensorize_kl(kl_gaussian(base, GaussianDist(sides[j] * evecs[:, j], Sigma)), m))
            for j in range(d)
        ]
        Delta = assouad_risk_lb(sides, max(tvs), SQUARE, 2.0)
        return risk_to_quantile(Delta, float(np.linalg.norm(sides)), SQUARE, 3 / 40, note="Assouad cube")

    def certificates(level):
        t1, t2 = pair(level)
        kl = tensorize_kl(kl_gaussian(GaussianDist(t1, Sigma), GaussianDist(t2, Sigma)), n)
        two_point = le_cam_kl_quantile_lb(kl, loss.distance(t1, t2) / 2, SQUARE, level, "top-eigenvector pair")
        boosted = boosted_certificate(assouad_at, 0.25, loss.A, "Assouad cube")
        return [two_point, boosted]

    def engine_lb(level):
        return halves(*certificates(level))

    return ProblemInstance(
        name="gaussian_mean_sq",
        params={"n": n, "d": d, "delta": delta},
        hypotheses=hyps,
        loss=loss,
        lb_fn=lb,
        lb_delta_max=0.25,
        ub_fn=ub,
        sampler=_gaussian_sampler(hyps),
        default_estimator=EstimatorSpec("sample_mean"),
        sim_hypotheses=[0],
        certificates=certificates,
        engine_lb=engine_lb,
        dim=d,
    )


def huber_core_laws(lam1, eps):
    """Three-point laws on {-c, 0, c}, c = sqrt(lam1 / (2 eps)), with equal variance lam1."""
    a = (eps + eps**2) / 2
    b = (3 * eps + eps**2) / 2
    if not 0 < eps or 1 - a - b < 0:
        raise DomainError("contamination level too large for valid atom probabilities")
    c = math.sqrt(lam1 / (2 * eps))
    atoms = [-c, 0.0, c]
    return DiscreteDist(atoms, [eps, 1 - 2 * eps, eps]), DiscreteDist(atoms, [a, 1 - a - b, b])


def robust_mean_huber(n, Sigma, eps, delta=0.25):
    """Mean estimation with a fraction ``eps`` of contaminated observations (lower bound only).

    Hypotheses 0 and 1 are the rotated three-point laws whose first-coordinate
    means differ by sqrt(lambda_1 eps / 2); the remaining coordinates are
    N(0, lambda_j).  The lower bound is the larger of the uncontaminated bound
    and ||Sigma|| eps / 8.
    """
    if not 0 < eps < 1:
        raise DomainError("eps must lie in (0, 1)")
    base = gaussian_mean_sq(n, Sigma, delta)
    Sigma, evals, evecs = _spectrum(Sigma)
    d = Sigma.shape[0]
    X1, Y1 = huber_core_laws(evals[0], eps)
    tv_core = tv_discrete(X1, Y1)
    theta1 = evecs[:, 0] * float(X1.mean()[0])
    theta2 = evecs[:, 0] * float(Y1.mean()[0])
    op = float(evals[0])
    loss = base.loss
    hyps = [Hypothesis(theta1, X1, "huber_core"), Hypothesis(theta2, Y1, "huber_core")]

    def sample(index, m, rng):
        first = hyps[index].dist.sample(m, rng)
        rest = rng.standard_normal((m, d - 1)) * np.sqrt(evals[1:])
        return np.column_stack([first, rest]) @ evecs.T

    def contamination_term():
        return op * eps / 8

    def lb(level):
        return max(base.lb_fn(level), contamination_term())

    def certificates(level):
        cert = huber_modulus_lb(theta1, theta2, tv_core, eps, loss)
        return base.certificates(level) + [cert]

    def engine_lb(level):
        certs = certificates(level)
        return max(halves(*certs[:2]), certs[2].value)

    return ProblemInstance(
        name="robust_mean_huber",
        params={"n": n, "d": d, "eps": eps, "delta": delta, "tv_core": tv_core},
        hypotheses=hyps,
        loss=loss,
        lb_fn=lb,
        lb_delta_max=0.25,
        ub_fn=None,
        sampler=sample,
        default_estimator=EstimatorSpec("sample_mean"),
        sim_hypotheses=[0, 1],
        certificates=certificates,
        engine_lb=engine_lb,
        dim=d,
        notes="contamination term ||Sigma|| eps / 8",
    )


def gaussian_mean_linf(n, d, sigma, delta=0.25):
    """Mean of N_d(theta, sigma^2 I) under l_inf loss.

    Hypotheses: the origin, the two-point alternative along e_1 built for level
    ``delta`` and, for d >= 2, the d points sigma sqrt(log d / (2n)) e_j.
    """
    d = int(d)
    if d < 1:
        raise ValueError("d must be positive")
    cov = sigma**2 * np.eye(d)
    loss = LossModel("linf", IDENTITY, A=1.0)

    def alt(level):
        return sigma * math.sqrt(kl_budget(level) / n) * np.eye(d)[0]

    spikes = [sigma * math.sqrt(math.log(d) / (2 * n)) * e for e in np.eye(d)] if d >= 2 else []
    thetas = [np.zeros(d), alt(delta)] + spikes
    roles = ["two_point", "two_point"] + ["fano"] * len(spikes)
    hyps = [Hypothesis(t, GaussianDist(t, cov), r) for t, r in zip(thetas, roles)]

    def lb(level):
        const = 80 if d >= 4 else 40
        return sigma * math.sqrt(math.log(d / level) / (const * n))

    def ub(level):
        return sigma * math.sqrt(2 * math.log(d / level) / n)

    def certificates(level):
        zero = GaussianDist(np.zeros(d), cov)
        t2 = alt(level)
        kl = tensorize_kl(kl_gaussian(zero, GaussianDist(t2, cov)), n)
        certs = [le_cam_kl_quantile_lb(kl, loss.distance(np.zeros(d), t2) / 2, IDENTITY, level, "pair along e_1")]
        if d >= 2:
            kls = [tensorize_kl(kl_gaussian(GaussianDist(t, cov), zero), n) for t in spikes]
            sep = loss.distance(spikes[0], spikes[1])
            certs.append(fano_quantile_lb(kls, sep / 2, IDENTITY, "coordinate spikes"))
        return [c for c in certs if c is not None]

    def engine_lb(level):
        return max(c.value for c in certificates(level) if c.valid_at(level))

    return ProblemInstance(
        name="gaussian_mean_linf",
        params={"n": n, "d": d, "sigma": sigma, "delta": delta},
        hypotheses=hyps,
        loss=loss,
        lb_fn=lb,
        lb_delta_max=0.25,
        ub_fn=ub,
        sampler=_gaussian_sampler(hyps),
        default_estimator=EstimatorSpec("sample_mean"),
        sim_hypotheses=[0],
        certificates=certificates,
        engine_lb=engine_lb,
        dim=d,
    )
