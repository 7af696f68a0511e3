"""Closed-form and engine lower bounds next to the upper bounds for every worked example."""

import numpy as np

from minimaxq.problems import (
    catoni_adversary,
    covariance_opnorm,
    density_point,
    gaussian_design,
    gaussian_mean_linf,
    gaussian_mean_sq,
    isotonic,
    robust_mean_huber,
    sco_hard_instance,
    sparse_regression,
)

delta = 0.05
problems = [
    gaussian_mean_sq(200, np.diag([1.0, 2, 3, 4, 5]), delta),
    robust_mean_huber(200, np.diag([1.0, 2, 3, 4, 5]), 0.2, delta),
    gaussian_mean_linf(500, 50, 1.0, delta),
    covariance_opnorm(2000, 30, 1.0, 10, delta),
    sparse_regression(gaussian_design(400, 100, np.random.default_rng(0)), 1.0, 5, delta=delta),
    density_point(4096, 1.0, 1.0, delta),
    isotonic(1000, delta),
    sco_hard_instance(500, delta=delta),
    catoni_adversary(100, 1.0, 0.01),
]
print(f"{'problem':20s} {'lb':>11s} {'engine_lb':>11s} {'ub':>11s}")
for p in problems:
    level = p.params["delta"]
    ub = p.ub(level)
    print(f"{p.name:20s} {p.lb(level):11.4g} {p.engine_lb(level):11.4g} {'n/a' if ub is None else f'{ub:11.4g}':>11s}")
