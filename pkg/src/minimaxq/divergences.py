"""Divergences between the distribution families used by the lower-bound constructions.

Three families are supported: finitely supported laws (:class:`DiscreteDist`),
multivariate Gaussians (:class:`GaussianDist`) and i.i.d. powers of either
(:class:`ProductDist`).  Each can be sampled from an explicit
``numpy.random.Generator``.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
from scipy import linalg

from .exceptions import CapacityError, DomainError

PROB_TOL = 1e-12
ATOM_DECIMALS = 12
PRODUCT_CAPACITY = 10**7


def _atom_key(atom):
    # canonical rounding so that closed-form atoms compare exactly
    return tuple(np.round(np.asarray(atom, dtype=float), ATOM_DECIMALS).tolist())


class DiscreteDist:
    """Finitely supported law on R^k.

    Parameters
    ----------
    atoms : array_like
        Support points, shape ``(m,)`` for scalar laws or ``(m, k)``.
    probs : array_like
        Probabilities, shape ``(m,)``; nonnegative and summing to one.
    """

    def __init__(self, atoms, probs):
        atoms = np.asarray(atoms, dtype=float)
        if atoms.ndim == 1:
            atoms = atoms[:, None]
        probs = np.asarray(probs, dtype=float).ravel()
        if atoms.ndim != 2 or atoms.shape[0] != probs.shape[0]:
            raise ValueError("atoms and probs must have matching lengths")
        if probs.size == 0:
            raise ValueError("a discrete law needs at least one atom")
        if np.any(probs < -PROB_TOL) or abs(probs.sum() - 1.0) > PROB_TOL:
            raise ValueError("probabilities must be nonnegative and sum to 1")
        keys = [_atom_key(a) for a in atoms]
        if len(set(keys)) != len(keys):
            raise ValueError("support points must be pairwise distinct")
        self.atoms = atoms
        self.probs = np.clip(probs, 0.0, None)
        self._keys = keys

    @classmethod
    def bernoulli(cls, p):
        """Law on {0, 1} putting mass ``p`` on 1."""
        return cls([0.0, 1.0], [1.0 - p, p])

    @property
    def dim(self):
        return self.atoms.shape[1]

    def __len__(self):
        return self.probs.shape[0]

    def __repr__(self):
        return f"DiscreteDist(atoms={self.atoms.squeeze().tolist()}, probs={self.probs.tolist()})"

    def mean(self):
        return self.probs @ self.atoms

    def covariance(self):
        centred = self.atoms - self.mean()
        return (centred * self.probs[:, None]).T @ centred

    def sample(self, size, rng):
        """Draw ``size`` i.i.d. points; scalar laws return a 1-D array."""
        idx = rng.choice(len(self), size=size, p=self.probs)
        out = self.atoms[idx]
        return out[..., 0] if self.dim == 1 else out

    def sample_index(self, size, rng):
        return rng.choice(len(self), size=size, p=self.probs)


class GaussianDist:
    """Multivariate normal law N(mean, covariance)."""

    def __init__(self, mean, covariance):
        mean = np.atleast_1d(np.asarray(mean, dtype=float))
        covariance = np.atleast_2d(np.asarray(covariance, dtype=float))
        d = mean.shape[0]
        if covariance.shape != (d, d):
            raise ValueError("covariance shape does not match the mean")
        if not np.allclose(covariance, covariance.T, atol=1e-10, rtol=0.0):
            raise ValueError("covariance must be symmetric")
        evals, evecs = np.linalg.eigh(covariance)
        if evals.min() < -1e-10:
            raise ValueError("covariance must be positive semi-definite")
        self.mean = mean
        self.covariance = covariance
        self._root = evecs * np.sqrt(np.clip(evals, 0.0, None))

    @property
    def dim(self):
        return self.mean.shape[0]

    def __repr__(self):
        return f"GaussianDist(dim={self.dim})"

    def sample(self, size, rng):
        z = rng.standard_normal((size, self.dim))
        return self.mean + z @ self._root.T


class ProductDist:
    """The ``power``-fold i.i.d. product of ``base``."""

    def __init__(self, base, power):
        if int(power) != power or power < 1:
            raise ValueError("power must be a positive integer")
        self.base = base
        self.power = int(power)

    def __repr__(self):
        return f"ProductDist({self.base!r}, power={self.power})"

    def sample(self, rng):
        return self.base.sample(self.power, rng)


def aligned_probs(p, q):
    """Probability vectors of ``p`` and ``q`` over their merged support."""
    if p.dim != q.dim:
        raise ValueError("laws live in different dimensions")
    index = {}
    for key in itertools.chain(p._keys, q._keys):
        index.setdefault(key, len(index))
    pp = np.zeros(len(index))
    qq = np.zeros(len(index))
    for key, w in zip(p._keys, p.probs):
        pp[index[key]] += w
    for key, w in zip(q._keys, q.probs):
        qq[index[key]] += w
    return pp, qq


def product_probs(p, q, n):
    """Aligned probability vectors of the ``n``-fold products over all outcome sequences.

    Outcomes are ordered lexicographically in the merged single-draw support.
    """
    pp, qq = aligned_probs(p, q)
    if pp.size**n > PRODUCT_CAPACITY:
        raise CapacityError(f"{pp.size}^{n} outcomes exceed the enumeration budget")
    pn = np.ones(1)
    qn = np.ones(1)
    for _ in range(n):
        pn = np.kron(pn, pp)
        qn = np.kron(qn, qq)
    return pn, qn


def kl_gaussian(p, q):
    """KL(p || q) between two Gaussian laws, via a Cholesky factor of q's covariance."""
    if p.dim != q.dim:
        raise ValueError("dimension mismatch")
    try:
        factor = linalg.cho_factor(q.covariance, lower=True)
    except linalg.LinAlgError as exc:
        raise DomainError("covariance of q is not positive definite") from exc
    d = p.dim
    diff = q.mean - p.mean
    trace_term = np.trace(linalg.cho_solve(factor, p.covariance))
    quad = diff @ linalg.cho_solve(factor, diff)
    logdet_q = 2.0 * np.log(np.diag(factor[0])).sum()
    sign, logdet_p = np.linalg.slogdet(p.covariance)
    if sign <= 0:
        return math.inf
    return max(0.0, 0.5 * (trace_term - d + quad + logdet_q - logdet_p))


def kl_discrete(p, q):
    """KL(p || q) for finitely supported laws; ``math.inf`` if p is not absolutely continuous."""
    pp, qq = aligned_probs(p, q)
    active = pp > 0
    if np.any(qq[active] <= 0):
        return math.inf
    return max(0.0, float(np.sum(pp[active] * np.log(pp[active] / qq[active]))))


def tv_discrete(p, q):
    """Total variation distance, half the l1 distance of the probability vectors."""
    pp, qq = aligned_probs(p, q)
    return min(1.0, 0.5 * float(np.abs(pp - qq).sum()))


def tensorize_kl(kl_per_sample, n):
    """KL between n-fold products, by additivity."""
    if kl_per_sample < 0:
        raise ValueError("KL must be nonnegative")
    return n * kl_per_sample


def tv_product_exact(p, q, n):
    """Exact TV between ``p^n`` and ``q^n`` by enumerating every outcome sequence."""
    pn, qn = product_probs(p, q, n)
    return min(1.0, 0.5 * float(np.abs(pn - qn).sum()))


def bretagnolle_huber_tv_bound(kl):
    """Upper bound sqrt(1 - exp(-KL)) on the total variation distance."""
    if kl < 0:
        raise ValueError("KL must be nonnegative")
    if math.isinf(kl):
        return 1.0
    return math.sqrt(-math.expm1(-kl))


def pinsker_tv_bound(kl):
    """Upper bound sqrt(KL / 2) on the total variation distance (may exceed 1)."""
    if kl < 0:
        raise ValueError("KL must be nonnegative")
    return math.sqrt(kl / 2.0)


def kl_divergence(p, q):
    """KL(p || q) dispatching on the law family; products tensorize."""
    if isinstance(p, ProductDist) and isinstance(q, ProductDist):
        if p.power != q.power:
            raise ValueError("product powers differ")
        return tensorize_kl(kl_divergence(p.base, q.base), p.power)
    if isinstance(p, GaussianDist) and isinstance(q, GaussianDist):
        return kl_gaussian(p, q)
    if isinstance(p, DiscreteDist) and isinstance(q, DiscreteDist):
        return kl_discrete(p, q)
    raise TypeError(f"no KL formula for {type(p).__name__} and {type(q).__name__}")
