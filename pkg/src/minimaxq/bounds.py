"""Quantile and risk lower bounds.

The quantile bounds return a :class:`BoundCertificate` (or ``None`` when the
method's condition fails) carrying the value and the range of quantile levels
on which it holds.  Risk bounds return plain floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .divergences import DiscreteDist, aligned_probs, tv_discrete
from .exceptions import DomainError

METRICS = ("euclidean", "linf", "operator", "design", "absolute")


class Transform:
    """Nondecreasing map g: [0, inf) -> [0, inf) with g(0) = 0.

    Kinds: ``identity``, ``square``, ``threshold`` (g(x) = 1{x > level}) and
    ``table`` (right-continuous step function through ``(xs, ys)``).  Every kind
    accepts a positive ``scale`` multiplying the output.
    """

    def __init__(self, kind="identity", level=0.0, scale=1.0, table=None):
        if kind not in ("identity", "square", "threshold", "table"):
            raise ValueError(f"unknown transform kind {kind!r}")
        if scale <= 0:
            raise ValueError("scale must be positive")
        self.kind = kind
        self.level = float(level)
        self.scale = float(scale)
        if kind == "table":
            xs, ys = (np.asarray(t, dtype=float) for t in table)
            if np.any(np.diff(xs) <= 0) or np.any(np.diff(ys) < 0):
                raise ValueError("table must be increasing in x and nondecreasing in y")
            self.table = (xs, ys)
        else:
            self.table = None

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "identity":
            out = x
        elif self.kind == "square":
            out = x * x
        elif self.kind == "threshold":
            out = (x > self.level).astype(float)
        else:
            xs, ys = self.table
            idx = np.searchsorted(xs, x, side="right") - 1
            out = np.where(idx >= 0, ys[np.clip(idx, 0, None)], 0.0)
        out = self.scale * out
        return float(out) if out.ndim == 0 else out

    def __repr__(self):
        extra = f", level={self.level}" if self.kind == "threshold" else ""
        return f"Transform({self.kind!r}{extra}, scale={self.scale})"


IDENTITY = Transform("identity")
SQUARE = Transform("square")


def _as_transform(g):
    if isinstance(g, Transform) or callable(g):
        return g
    if isinstance(g, str):
        return Transform(g)
    raise TypeError("g must be a Transform, a callable or a kind name")


class LossModel:
    """Loss L(a, b) = g(d(a, b)) for a pseudo-metric d.

    Parameters
    ----------
    metric : str or callable
        One of ``euclidean``, ``linf``, ``operator``, ``design`` (uses
        ``design``, the seminorm n^{-1/2} ||X v||_2) and ``absolute``, or a
        callable ``d(a, b)``.
    g : Transform or callable
    A : float
        Quasi-triangle constant, L(a, b) <= A (L(a, c) + L(b, c)).
    """

    def __init__(self, metric="euclidean", g=IDENTITY, A=1.0, design=None):
        if isinstance(metric, str) and metric not in METRICS:
            raise ValueError(f"unknown metric {metric!r}")
        if metric == "design" and design is None:
            raise ValueError("the design seminorm needs a design matrix")
        self.metric = metric
        self.g = _as_transform(g)
        self.A = float(A)
        self.design = None if design is None else np.asarray(design, dtype=float)

    def distance(self, a, b):
        if callable(self.metric):
            return float(self.metric(a, b))
        diff = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
        if self.metric == "euclidean":
            return float(np.linalg.norm(diff.ravel()))
        if self.metric == "linf":
            return float(np.abs(diff).max())
        if self.metric == "operator":
            return float(np.linalg.norm(diff, 2))
        if self.metric == "design":
            X = self.design
            return float(np.linalg.norm(X @ diff) / math.sqrt(X.shape[0]))
        return float(abs(diff).max())

    def __call__(self, a, b):
        return float(self.g(self.distance(a, b)))


@dataclass(frozen=True)
class BoundCertificate:
    """A lower bound ``value`` on the lower minimax quantile.

    Valid for every quantile level below ``delta_max`` (and at it when
    ``inclusive``).
    """

    value: float
    delta_max: float
    method: str
    construction_note: str = ""
    inclusive: bool = False

    def __post_init__(self):
        if not self.value >= 0:
            raise ValueError("certificate value must be nonnegative")
        if not 0 < self.delta_max <= 1:
            raise ValueError("delta_max must lie in (0, 1]")

    def valid_at(self, delta):
        return delta < self.delta_max or (self.inclusive and delta == self.delta_max)


def _check_delta(delta):
    if not 0 < delta < 0.5:
        raise ValueError("delta must lie in (0, 1/2)")


def le_cam_quantile_lb(tv, eta, g, delta, note=""):
    """Two-point bound: g(eta) if TV(P1, P2) < 1 - 2 delta, else None.

    ``eta`` is half the separation d(theta1, theta2).  The certificate holds for
    every level below (1 - tv)/2.
    """
    _check_delta(delta)
    if not 0 <= tv <= 1:
        raise ValueError("tv must lie in [0, 1]")
    if not tv < 1 - 2 * delta:
        return None
    return BoundCertificate(float(_as_transform(g)(eta)), (1 - tv) / 2, "le_cam", note)


def le_cam_threshold_kl(delta):
    """The KL budget log(1 / (4 delta (1 - delta)))."""
    return -math.log(4 * delta * (1 - delta))


def le_cam_kl_quantile_lb(kl, eta, g, delta, note=""):
    """Two-point bound in KL form: g(eta) if KL < log(1 / (4 delta (1 - delta)))."""
    _check_delta(delta)
    if kl < 0:
        raise ValueError("kl must be nonnegative")
    if not kl < le_cam_threshold_kl(delta):
        return None
    # largest level at which the KL condition still holds
    x = math.exp(-kl)
    delta_max = 0.5 * x / (1 + math.sqrt(1 - x))
    return BoundCertificate(float(_as_transform(g)(eta)), delta_max, "le_cam_kl", note)


def fano_ratio(kls_to_Q):
    kls = np.asarray(kls_to_Q, dtype=float)
    M = kls.size
    if M < 2:
        raise ValueError("Fano's method needs at least two hypotheses")
    return (kls.mean() + math.log(2 - 1 / M)) / math.log(M)


def fano_quantile_lb(kls_to_Q, eta, g, note=""):
    """Multiple-hypothesis bound: g(eta) for levels below 1 - rho.

    ``kls_to_Q`` are KL(P_j, Q) for a common reference law Q chosen by the
    caller, and ``eta`` is half the minimal pairwise separation.
    """
    rho = fano_ratio(kls_to_Q)
    if rho >= 1:
        return None
    return BoundCertificate(float(_as_transform(g)(eta)), 1 - rho, "fano", note)


def risk_to_quantile(Delta, D, g, epsilon, D_upper=None, note=""):
    """Turn a local risk lower bound into a quantile lower bound.

    Parameters
    ----------
    Delta : float
        Lower bound on the local minimax risk over a finite family.
    D : float
        Diameter of that family.  When only a range ``[D, D_upper]`` is known
        the value uses the lower end and the validity range the upper end.
    g : Transform
    epsilon : float

    Returns
    -------
    BoundCertificate or None
        Value g(epsilon D), valid for levels up to
        (Delta - g(epsilon D)) / g((1 + epsilon) D).
    """
    g = _as_transform(g)
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    D_hi = D if D_upper is None else D_upper
    if g(D) <= 0:
        raise DomainError("g(D) must be positive")
    value = float(g(epsilon * D))
    delta_max = (Delta - value) / float(g((1 + epsilon) * D_hi))
    if delta_max <= 0:
        return None
    return BoundCertificate(value, min(delta_max, 1.0), "risk_to_quantile", note, inclusive=True)


def boost_h(x):
    """Failure probability x^3 + 3x^2(1 - x) of a best-two-of-three vote."""
    if not 0 <= x <= 1:
        raise ValueError("x must lie in [0, 1]")
    return x**3 + 3 * x**2 * (1 - x)


def boost_find_k(delta_minus, delta_plus):
    """Smallest k >= 1 with h iterated k times at ``delta_plus`` below ``delta_minus``."""
    if not 0 < delta_minus < delta_plus < 0.5:
        raise ValueError("need 0 < delta_minus < delta_plus < 1/2")
    x = boost_h(delta_plus)
    k = 1
    while x > delta_minus:
        x = boost_h(x)
        k += 1
    return k


def boost_quantile_lb(lb_at_delta_minus, A, k):
    """Boosted bound lb / (2A)^k.

    ``lb_at_delta_minus`` must be a lower bound for the 3^k-fold product model,
    i.e. computed with 3^k times the sample size; the caller does that
    bookkeeping.
    """
    if lb_at_delta_minus < 0 or A <= 0:
        raise ValueError("need lb >= 0 and A > 0")
    if int(k) != k or k < 1:
        raise ValueError("k must be a positive integer")
    return lb_at_delta_minus / (2 * A) ** k


def boost_sample_factor(k):
    return 3**k


def quantile_to_risk_lb(quantile_lb, delta):
    """Markov-type conversion: risk >= delta * quantile."""
    if not 0 < delta <= 1:
        raise ValueError("delta must lie in (0, 1]")
    return delta * quantile_lb


def le_cam_risk_lb(tv, eta, g):
    return float(_as_transform(g)(eta)) * (1 - tv) / 2


def fano_risk_lb(kls_to_Q, eta, g):
    rho = fano_ratio(kls_to_Q)
    return float(_as_transform(g)(eta)) * max(0.0, 1 - rho)


def assouad_risk_lb(alphas, max_tv_adjacent, g, A):
    """Hypercube bound (1 / 2A)(1 - max TV between neighbours) sum_j g(alpha_j)."""
    g = _as_transform(g)
    total = float(sum(g(a) for a in alphas))
    return (1 - max_tv_adjacent) * total / (2 * A)


def huber_modulus_lb(theta1, theta2, tv_core, epsilon, loss):
    """Contamination bound: g(d(theta1, theta2) / 2) if tv_core <= eps / (1 - eps).

    The certificate holds for every level below 1/2.
    """
    if not 0 <= epsilon < 1:
        raise ValueError("epsilon must lie in [0, 1)")
    if tv_core > epsilon / (1 - epsilon):
        return None
    eta = loss.distance(theta1, theta2) / 2
    return BoundCertificate(float(loss.g(eta)), 0.5, "huber_modulus", "contaminated two-point pair")


def huber_mixture_witnesses(R1, R2):
    """Contaminations that make (1 - eps') R1 + eps' Q1 equal (1 - eps') R2 + eps' Q2.

    Returns ``(Q1, Q2, eps_prime)`` with eps'/(1 - eps') = TV(R1, R2).
    """
    tv = tv_discrete(R1, R2)
    if tv == 0:
        return R1, R1, 0.0
    pp, qq = aligned_probs(R1, R2)
    atoms = _merged_atoms(R1, R2)
    q1 = np.clip(qq - pp, 0.0, None) / tv
    q2 = np.clip(pp - qq, 0.0, None) / tv
    q1 /= q1.sum()
    q2 /= q2.sum()
    eps_prime = tv / (1 + tv)
    return DiscreteDist(atoms, q1), DiscreteDist(atoms, q2), eps_prime


def _merged_atoms(p, q):
    seen = {}
    for key, atom in zip(p._keys + q._keys, np.vstack([p.atoms, q.atoms])):
        seen.setdefault(key, atom)
    return np.asarray(list(seen.values()))


def mixture(weight, R, Q):
    """The law (1 - weight) R + weight Q on the merged support."""
    rr, qq = aligned_probs(R, Q)
    return DiscreteDist(_merged_atoms(R, Q), (1 - weight) * rr + weight * qq)


def matrix_bernstein_cov_bound(op_norm, eff_rank, n, d, delta):
    """513 ||Sigma|| sqrt(r (log(1/delta) + log(8d)) / n), or None when that radicand exceeds 1."""
    ratio = eff_rank * (math.log(1 / delta) + math.log(8 * d)) / n
    if ratio > 1:
        return None
    return 513 * op_norm * math.sqrt(ratio)


