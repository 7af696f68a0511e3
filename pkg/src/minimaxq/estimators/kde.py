"""Pointwise kernel density estimation with fixed and Lepski-selected bandwidths."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate


@dataclass(frozen=True)
class Kernel:
    """A symmetric kernel supported on [-radius, radius]."""

    name: str
    fn: object
    radius: float

    def __call__(self, u):
        return self.fn(np.asarray(u, dtype=float))

    @property
    def sup_norm(self):
        return float(self(0.0))

    @property
    def roughness(self):
        """R(K), the integral of K^2."""
        return _integral(self, lambda u: self(u) ** 2)

    def abs_moment(self, beta):
        """mu_beta(K), the integral of |u|^beta |K(u)|."""
        return _integral(self, lambda u: np.abs(u) ** beta * np.abs(self(u)))


def _integral(kernel, f):
    val, _ = integrate.quad(f, -kernel.radius, kernel.radius, epsabs=1e-13, epsrel=1e-12, limit=200)
    return float(val)


def _epanechnikov(u):
    return np.where(np.abs(u) < 1, 0.75 * (1 - u * u), 0.0)


EPANECHNIKOV = Kernel("epanechnikov", _epanechnikov, 1.0)


def _bump_unnormalised(u):
    u = np.asarray(u, dtype=float)
    inside = np.abs(u) < 0.5
    out = np.zeros_like(u)
    out[inside] = np.exp(-1.0 / (1.0 - 4.0 * u[inside] ** 2))
    return out


@lru_cache(maxsize=None)
def bump_normaliser():
    val, _ = integrate.quad(_bump_unnormalised, -0.5, 0.5, epsabs=1e-15, epsrel=1e-13)
    return float(val)


def _bump(u):
    return _bump_unnormalised(u) / bump_normaliser()


def bump_derivative(u):
    """Derivative of the normalised bump kernel."""
    u = np.asarray(u, dtype=float)
    inside = np.abs(u) < 0.5
    out = np.zeros_like(u)
    ui = u[inside]
    out[inside] = _bump(ui) * (-8.0 * ui / (1.0 - 4.0 * ui**2) ** 2)
    return out


BUMP = Kernel("bump", _bump, 0.5)

KERNELS = {"epanechnikov": EPANECHNIKOV, "bump": BUMP}


def kde_point(data, x0, h, kernel=EPANECHNIKOV):
    """Kernel density estimate (nh)^{-1} sum_i K((X_i - x0) / h)."""
    if h <= 0:
        raise ValueError("bandwidth must be positive")
    data = np.asarray(data, dtype=float).ravel()
    return float(kernel((data - x0) / h).sum() / (data.shape[0] * h))


def holder_sup_constant(beta):
    """C_1(beta) with ||f||_inf <= C_1 gamma^{1/(beta+1)} on the Hoelder class.

    The closed form is valid for beta <= 1; above that the beta = 1 value is
    used.
    """
    b = min(beta, 1.0)
    return ((b + 1) / (2 * b)) ** (b / (b + 1))


@dataclass(frozen=True)
class LepskiConstants:
    beta: float
    C1: float
    C2: float
    sqrt_C: float
    c: float

    @property
    def C(self):
        return self.sqrt_C**2


@lru_cache(maxsize=64)
def lepski_constants(beta, kernel=EPANECHNIKOV, C1=None):
    """Bandwidth, radius and range constants for the pointwise KDE bound."""
    if not 0 < beta <= 2:
        raise ValueError("beta must lie in (0, 2]")
    C1 = holder_sup_constant(beta) if C1 is None else float(C1)
    ell = math.ceil(beta)
    fact = math.factorial(ell - 1)
    R = kernel.roughness
    mu = kernel.abs_moment(beta)
    C2 = (C1 * R * fact**2 / mu**2) ** (1 / (2 * beta + 1))
    sqrt_C = 2 * math.sqrt(2 * C1 * R / C2) + mu * C2**beta / fact
    c = (18 * C1 * R * C2 / kernel.sup_norm**2) ** ((2 * beta + 1) / (2 * beta))
    return LepskiConstants(beta, C1, C2, sqrt_C, c)


def kde_bandwidth(n, delta, beta, gamma, consts):
    """h = C_2 gamma^{-1/(beta+1)} (log(2/delta)/n)^{1/(2beta+1)}."""
    return consts.C2 * gamma ** (-1 / (beta + 1)) * (math.log(2 / delta) / n) ** (1 / (2 * beta + 1))


def lepski_level_count(n, consts):
    """k_+ = floor(c n / log 2 - 1)."""
    return int(math.floor(consts.c * n / math.log(2) - 1))


def lepski_kde(data, x0, beta, gamma, kernel=EPANECHNIKOV, C1=None, return_info=False):
    """Quantile-level-free pointwise density estimate by intersecting confidence intervals.

    For k = 1..k_+ the interval centred at the KDE with level 2^{-k} has radius
    sqrt(C) gamma^{1/(beta+1)} ((k+1) log 2 / n)^{beta/(2beta+1)}.  The estimate
    is the left end of the longest nonempty suffix intersection, clipped to
    [0, C_1 gamma^{1/(beta+1)}].
    """
    consts = lepski_constants(beta, kernel, C1)
    data = np.asarray(data, dtype=float).ravel()
    n = data.shape[0]
    upper = consts.C1 * gamma ** (1 / (beta + 1))
    if n <= 3 * math.log(2) / consts.c:
        return (0.0, {"k_hat": None, "k_plus": 0}) if return_info else 0.0
    k_plus = lepski_level_count(n, consts)
    a = 1 / (2 * beta + 1)
    h_scale = consts.C2 * gamma ** (-1 / (beta + 1))
    r_scale = consts.sqrt_C * gamma ** (1 / (beta + 1))
    h1 = h_scale * (2 * math.log(2) / n) ** a
    # beyond J every interval contains [0, max centre], so it cannot change the answer
    target = kernel.sup_norm / h1
    J = math.ceil(n * (target / r_scale) ** (1 / (beta * a)) / math.log(2)) if r_scale > 0 else k_plus
    kmax = int(min(k_plus, max(J, 1)))
    ks = np.arange(1, kmax + 1)
    levels = (ks + 1) * math.log(2) / n
    h = h_scale * levels**a
    radii = r_scale * levels ** (beta * a)
    dist = np.abs(data - x0)
    if kernel is EPANECHNIKOV:
        # first level whose bandwidth exceeds each distance
        t = n * (dist / h_scale) ** (2 * beta + 1) / math.log(2)
        first = np.clip(np.floor(t), 1, kmax + 1).astype(np.int64)
        counts = np.cumsum(np.bincount(first, minlength=kmax + 2)[1 : kmax + 1])
        sq = np.cumsum(np.bincount(first, weights=dist**2, minlength=kmax + 2)[1 : kmax + 1])
        centres = 0.75 * (counts - sq / h**2) / (n * h)
    else:
        centres = np.array([kde_point(data, x0, hk, kernel) for hk in h])
    lows = centres - radii
    highs = centres + radii
    suffix_low = np.maximum.accumulate(lows[::-1])[::-1]
    suffix_high = np.minimum.accumulate(highs[::-1])[::-1]
    ok = np.nonzero(suffix_low <= suffix_high)[0]
    if ok.size:
        k_hat = int(ok[0]) + 1
        est = float(suffix_low[ok[0]])
    else:
        k_hat = kmax + 1
        est = 0.0
    est = min(max(est, 0.0), upper)
    if return_info:
        return est, {"k_hat": k_hat, "k_plus": k_plus, "k_used": kmax, "centres": centres, "radii": radii}
    return est


def lepski_upper_bound(n, delta, beta, gamma, kernel=EPANECHNIKOV, C1=None):
    """High-probability squared-error bound of :func:`lepski_kde`."""
    consts = lepski_constants(beta, kernel, C1)
    k_plus = lepski_level_count(n, consts)
    g = gamma ** (2 / (beta + 1))
    if k_plus >= 2 and delta >= 2.0 ** (-(k_plus - 1)):
        return 4 * consts.C * g * (math.log(8 / delta) / n) ** (2 * beta / (2 * beta + 1))
    return consts.C1**2 * g
