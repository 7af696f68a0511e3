"""Pointwise density estimation over a Hoelder class."""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy import integrate

from ..bounds import SQUARE, LossModel, le_cam_kl_quantile_lb
from ..estimators import EstimatorSpec
from ..estimators.kde import BUMP, bump_derivative, lepski_upper_bound
from .base import Hypothesis, ProblemInstance, kl_budget

HOLDER_GRID = 10_000
_HOLDER_CHUNK = 500


@lru_cache(maxsize=16)
def bump_holder_norm(beta, grid=HOLDER_GRID):
    """Hoelder constant of the bump kernel, as a sup over pairs of a uniform grid on [-1/2, 1/2].

    For beta <= 1 the quotient uses the kernel itself, for beta in (1, 2] its
    derivative.
    """
    if not 0 < beta <= 2:
        raise ValueError("beta must lie in (0, 2]")
    m = math.ceil(beta) - 1
    x = np.linspace(-0.5, 0.5, grid)
    vals = BUMP(x) if m == 0 else bump_derivative(x)
    expo = beta - m
    best = 0.0
    for start in range(0, grid, _HOLDER_CHUNK):
        xs = x[start : start + _HOLDER_CHUNK, None]
        vs = vals[start : start + _HOLDER_CHUNK, None]
        gap = np.abs(xs - x[None, :])
        with np.errstate(divide="ignore", invalid="ignore"):
            q = np.abs(vs - vals[None, :]) / gap**expo
        q[gap == 0] = 0.0
        best = max(best, float(q.max()))
    return best


class DensityPair:
    """Two Hoelder densities that differ at the origin only through a narrow bump.

    With s = (gamma / ||K||)^{1/(beta+1)}, g(x) = s K(s x) and
    h(x) = lam s K(lam^{-1/beta} s x), the densities are
    f0 = (g + h + g(2/s - .)) / Z and f1 = (g + (g + h)(2/s - .)) / Z with
    Z = 2 + lam^{(beta+1)/beta}.  ``lam = 0`` gives the common base density.
    """

    def __init__(self, beta, gamma, lam):
        if not 0 <= lam <= 1:
            raise ValueError("lam must lie in [0, 1]")
        self.beta = float(beta)
        self.gamma = float(gamma)
        self.lam = float(lam)
        self.kernel_norm = bump_holder_norm(self.beta)
        self.scale = (self.gamma / self.kernel_norm) ** (1 / (self.beta + 1))
        self.shift = 2 / self.scale
        self.h_scale = self.scale * self.lam ** (-1 / self.beta) if lam > 0 else math.inf
        self.normaliser = 2 + self.lam ** ((self.beta + 1) / self.beta)

    def g(self, x):
        return self.scale * BUMP(self.scale * np.asarray(x, dtype=float))

    def h(self, x):
        if self.lam == 0:
            return np.zeros_like(np.asarray(x, dtype=float))
        return self.lam * self.scale * BUMP(self.h_scale * np.asarray(x, dtype=float))

    def f0(self, x):
        x = np.asarray(x, dtype=float)
        return (self.g(x) + self.h(x) + self.g(self.shift - x)) / self.normaliser

    def f1(self, x):
        x = np.asarray(x, dtype=float)
        return (self.g(x) + self.g(self.shift - x) + self.h(self.shift - x)) / self.normaliser

    def pdf(self, index, x):
        return self.f0(x) if index == 0 else self.f1(x)

    @property
    def gap_at_origin(self):
        """f0(0) - f1(0) = h(0) / Z."""
        return float(self.h(0.0)) / self.normaliser

    @property
    def h_radius(self):
        return 0.5 / self.h_scale if self.lam > 0 else 0.0

    def kl(self):
        """Per-observation KL(f0, f1) = Z^{-1} int h log(1 + h/g) over the support of h."""
        if self.lam == 0:
            return 0.0
        r = self.h_radius

        def integrand(x):
            hx = float(self.h(x))
            return hx * math.log1p(hx / float(self.g(x))) if hx > 0 else 0.0

        val, _ = integrate.quad(integrand, -r, r, epsabs=1e-14, epsrel=1e-10, limit=200)
        return val / self.normaliser

    def kl_bound(self):
        return self.lam ** ((2 * self.beta + 1) / self.beta) / 2

    def sample(self, index, size, rng):
        """Exact rejection sampler.

        Since h <= lam g, f0 is dominated by ((1 + lam) g + g(2/s - .)) / Z and f1
        by its mirror image; proposals come from that envelope.
        """
        out = np.empty(0)
        bumped_weight = (1 + self.lam) / (2 + self.lam)
        while out.size < size:
            m = 2 * (size - out.size) + 16
            base = _bump_draws(m, rng) / self.scale
            on_bumped = rng.random(m) < bumped_weight
            # index 0 carries h near the origin, index 1 near the shifted copy
            at_origin = on_bumped if index == 0 else ~on_bumped
            x = np.where(at_origin, base, self.shift - base)
            near, far = (self.g(x), self.g(self.shift - x)) if index == 0 else (self.g(self.shift - x), self.g(x))
            env = (1 + self.lam) * near + far
            accept = rng.random(m) * env <= self.pdf(index, x) * self.normaliser
            out = np.concatenate([out, x[accept]])
        return out[:size]


def _bump_draws(m, rng):
    """Draws from the bump kernel by rejection from the uniform law on (-1/2, 1/2)."""
    out = np.empty(0)
    peak = BUMP.sup_norm
    while out.size < m:
        k = 2 * (m - out.size) + 16
        u = rng.random(k) - 0.5
        keep = rng.random(k) * peak <= BUMP(u)
        out = np.concatenate([out, u[keep]])
    return out[:m]


def density_lambda(n, delta, beta):
    return min((kl_budget(delta) / n) ** (beta / (2 * beta + 1)), 1.0)


def density_point(n, beta, gamma, delta=0.25):
    """Density at the origin under squared loss, Hoelder smoothness (beta, gamma).

    Hypotheses 0 and 1 are f0 and f1 of the pair built for level ``delta``;
    hypothesis 2 is the triangular density gamma-scaled to Lipschitz constant
    gamma (a member of the class for beta <= 1), a fixed law for rate sweeps.
    Parameters are values at the origin.
    """
    if not 0 < beta <= 2:
        raise ValueError("beta must lie in (0, 2]")
    n = int(n)
    loss = LossModel("absolute", SQUARE, A=2.0)
    pair = DensityPair(beta, gamma, density_lambda(n, delta, beta))
    # (1 - |x| / w)_+ / w with w = gamma^{-1/2} has Lipschitz constant gamma
    width = gamma ** (-0.5)
    hyps = [
        Hypothesis(float(pair.f0(0.0)), pair, "two_point"),
        Hypothesis(float(pair.f1(0.0)), pair, "two_point"),
        Hypothesis(1 / width, None, "triangular"),
    ]
    knorm = pair.kernel_norm
    expo = 2 * beta / (2 * beta + 1)

    def lb(level):
        return gamma ** (2 / (beta + 1)) / (36 * 5**expo * knorm ** (2 / (beta + 1))) * min((math.log(1 / level) / n) ** expo, 1.0)

    def ub(level):
        return lepski_upper_bound(n, level, beta, gamma)

    def certificates(level):
        p = DensityPair(beta, gamma, density_lambda(n, level, beta))
        cert = le_cam_kl_quantile_lb(n * p.kl(), p.gap_at_origin / 2, SQUARE, level, f"bump pair, lam={p.lam:.4g}")
        return [cert] if cert is not None else []

    def engine_lb(level):
        return max(c.value for c in certificates(level))

    def sample(index, m, rng):
        if index == 2:
            return rng.triangular(-width, 0.0, width, m)
        return pair.sample(index, m, rng)

    return ProblemInstance(
        name="density_point",
        params={"n": n, "beta": beta, "gamma": gamma, "delta": delta, "kernel_norm": knorm},
        hypotheses=hyps,
        loss=loss,
        lb_fn=lb,
        lb_delta_max=0.25,
        ub_fn=ub,
        sampler=sample,
        default_estimator=EstimatorSpec("kde_lepski"),
        context={"x0": 0.0, "beta": beta, "gamma": gamma},
        sim_hypotheses=[0],
        certificates=certificates,
        engine_lb=engine_lb,
        dim=1,
    )
