"""Common container for the worked examples."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np

from ..bounds import BoundCertificate, boost_find_k, boost_quantile_lb, boost_sample_factor
from ..estimators import EstimatorSpec, build_estimator


@dataclass
class Hypothesis:
    """A parameter value with the per-observation law that generates the data."""

    param: Any
    dist: Any = None
    role: str = ""


@dataclass
class ProblemInstance:
    """Hypothesis family, loss, closed-form bounds and sampler of one example.

    ``lb`` returns None outside ``(0, lb_delta_max]``; ``ub`` returns None where
    no upper bound is available.  ``certificates(delta)`` rebuilds the lower
    bound pieces through the bounds engine and ``engine_lb(delta)`` combines
    them the way the closed form does.
    """

    name: str
    params: dict
    hypotheses: list
    loss: Callable
    lb_fn: Callable
    lb_delta_max: float
    ub_fn: Optional[Callable]
    sampler: Callable
    default_estimator: EstimatorSpec
    context: dict = field(default_factory=dict)
    sim_hypotheses: list = field(default_factory=lambda: [0])
    certificates: Optional[Callable] = None
    engine_lb: Optional[Callable] = None
    dim: int = 1
    notes: str = ""
    extras: dict = field(default_factory=dict)

    def lb(self, delta):
        if not 0 < delta <= self.lb_delta_max:
            return None
        return float(self.lb_fn(delta))

    def ub(self, delta):
        if self.ub_fn is None:
            return None
        val = self.ub_fn(delta)
        return None if val is None else float(val)

    def sample(self, index, n, rng):
        return self.sampler(index, n, rng)

    def evaluate_loss(self, estimate, index):
        return float(self.loss(estimate, self.hypotheses[index].param))

    def estimator(self, spec=None):
        return build_estimator(spec or self.default_estimator, self.context)


def kl_budget(delta):
    """log(1 / (4 delta (1 - delta)))."""
    return -math.log(4 * delta * (1 - delta))


def halves(*certs):
    """Average of certificate values; each must be valid at the level in use."""
    return sum(c.value for c in certs) / len(certs)


def boosted_certificate(risk_certificate_at, delta_plus, A, note=""):
    """Risk-to-quantile certificate pushed up to level ``delta_plus`` by boosting.

    ``risk_certificate_at(rep)`` must return the risk-to-quantile certificate
    for the model with ``rep`` times as many observations.
    """
    base = risk_certificate_at(1)
    if base is None:
        return None
    if base.delta_max >= delta_plus:
        return base
    k = boost_find_k(base.delta_max, delta_plus)
    cert = risk_certificate_at(boost_sample_factor(k))
    value = boost_quantile_lb(cert.value, A, k)
    return BoundCertificate(value, delta_plus, "boosted", f"{note}; k={k}", inclusive=True)


def check_grid(problem, deltas=(0.25, 0.1, 0.05, 0.01)):
    """Pairs (lb, ub) on a grid of levels, for the lb <= ub invariant."""
    return [(d, problem.lb(d), problem.ub(d)) for d in deltas]


def as_rng(rng):
    return rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
