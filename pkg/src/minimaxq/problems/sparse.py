"""Sparse linear regression under the in-sample prediction loss."""

from __future__ import annotations

import math

import numpy as np

from ..bounds import SQUARE, BoundCertificate, LossModel, fano_quantile_lb, le_cam_kl_quantile_lb
from ..estimators import EstimatorSpec
from ..packing import gv_sparse_packing, sparse_packing_log_bound
from .base import Hypothesis, ProblemInstance, as_rng, halves, kl_budget

SEPARATION_CHUNK = 512
MAX_PACKING_WORDS = 2000


def gaussian_design(n, d, rng=None):
    """Gaussian design with every column rescaled to Euclidean norm sqrt(n)."""
    rng = as_rng(rng)
    X = rng.standard_normal((n, d))
    return X * (math.sqrt(n) / np.linalg.norm(X, axis=0))


def _min_design_separation(thetas, gram):
    """min over distinct rows of (t_j - t_k)^T G (t_j - t_k), computed in blocks."""
    q = np.einsum("ij,jk,ik->i", thetas, gram, thetas)
    tg = thetas @ gram
    best = math.inf
    M = thetas.shape[0]
    for start in range(0, M, SEPARATION_CHUNK):
        stop = min(M, start + SEPARATION_CHUNK)
        block = q[start:stop, None] + q[None, :] - 2 * tg[start:stop] @ thetas.T
        idx = np.arange(start, stop)
        block[idx - start, idx] = np.inf
        best = min(best, float(block.min()))
    return best


def sparse_regression(X, sigma, s, c=0.5, C=2.0, delta=0.25, signal=1.0):
    """Regression y = X theta + sigma * noise over s-sparse theta.

    Hypothesis 0 is the signal vector with ``s`` leading entries equal to
    ``signal`` (used for simulation); 1 and 2 are the two-point pair built for
    level ``delta``; the rest are scaled sparse packing words.  ``c`` and ``C``
    are the assumed lower and upper restricted-eigenvalue constants of ``X``.
    """
    X = np.asarray(X, dtype=float)
    n, d = X.shape
    s = int(s)
    if not 1 <= s <= d:
        raise ValueError("need 1 <= s <= d")
    if (np.linalg.norm(X, axis=0) > math.sqrt(n) * (1 + 1e-9)).any():
        raise ValueError("design columns must have norm at most sqrt(n)")
    loss = LossModel("design", SQUARE, A=2.0, design=X)
    gram = X.T @ X / n

    def pair(level):
        return np.zeros(d), math.sqrt(sigma**2 * kl_budget(level) / n) * np.eye(d)[0]

    theta_star = np.zeros(d)
    theta_star[:s] = signal
    hyps = [Hypothesis(theta_star, None, "signal")] + [Hypothesis(t, None, "two_point") for t in pair(delta)]

    s_pack = min(max(1, s // 2), int(math.floor(d / (4 * math.e))))
    packed = None
    log_m = sparse_packing_log_bound(d, s_pack) if s_pack >= 1 else 0.0
    # the guaranteed cardinality is all the bound uses; a full scan is exponential in s
    target = max(2, math.ceil(math.exp(max(log_m, 0.0)))) if log_m < math.log(MAX_PACKING_WORDS) else None
    if s_pack >= 1 and target is not None:
        packing, vectors = gv_sparse_packing(d, s_pack, max_words=target)
        M = packing.size
        if M >= 2:
            packed = vectors * math.sqrt(sigma**2 * math.log(M) / (4 * C**2 * n))
            hyps += [Hypothesis(t, None, "packing") for t in packed]

    big_d = d >= 4 * math.e

    def lb(level):
        if big_d:
            return c**2 * sigma**2 * math.log(1 / level) / (40 * n) + c**2 * sigma**2 * s * math.log(math.e * d / s) / (2**14 * C**2 * n)
        return c**2 * sigma**2 * (s * math.log(math.e * d / s) + math.log(1 / level)) / (200 * n)

    def ub(level):
        return 100 * (4 + math.sqrt(2)) * sigma**2 * (s * math.log(math.e * d / s) / (c**2 * n) + math.log(1 / level) / n)

    def fano_certificate():
        if s_pack < 1:
            return None
        if packed is None:
            # too many words to build: KL <= log M / 8 and the assumed lower constant c
            rho = 1 / 8 + math.log(2) / log_m
            sep_sq = c**2 * sigma**2 * log_m / (16 * C**2 * n)
            if rho >= 1:
                return None
            return BoundCertificate(sep_sq / 4, 1 - rho, "fano", f"sparse packing, log size {log_m:.3f}")
        kls = np.einsum("ij,jk,ik->i", packed, gram, packed) * n / (2 * sigma**2)
        sep_sq = _min_design_separation(packed, gram)
        return fano_quantile_lb(kls, math.sqrt(sep_sq) / 2, SQUARE, f"sparse packing, {packed.shape[0]} words")

    fano = fano_certificate()

    def certificates(level):
        t1, t2 = pair(level)
        kl = float(np.sum((X @ t2) ** 2)) / (2 * sigma**2)
        certs = [le_cam_kl_quantile_lb(kl, loss.distance(t1, t2) / 2, SQUARE, level, "pair along e_1")]
        if fano is not None:
            certs.append(fano)
        return [c_ for c_ in certs if c_ is not None]

    def engine_lb(level):
        certs = [c_ for c_ in certificates(level) if c_.valid_at(level)]
        if big_d and len(certs) == 2:
            return halves(*certs)
        return certs[0].value

    def sample(index, m, rng):
        if m != n:
            raise ValueError("the design fixes the sample size")
        return X @ hyps[index].param + sigma * rng.standard_normal(n)

    return ProblemInstance(
        name="sparse_regression",
        params={"n": n, "d": d, "s": s, "sigma": sigma, "c": c, "C": C, "delta": delta},
        hypotheses=hyps,
        loss=loss,
        lb_fn=lb,
        lb_delta_max=0.25,
        ub_fn=ub,
        sampler=sample,
        default_estimator=EstimatorSpec("slope"),
        context={"X": X, "sigma": sigma},
        sim_hypotheses=[0],
        certificates=certificates,
        engine_lb=engine_lb,
        dim=d,
        notes="restricted-eigenvalue constants (c, C) are assumed, not verified",
    )
