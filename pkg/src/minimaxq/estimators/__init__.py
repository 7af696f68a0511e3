"""Estimators and a small registry that builds them from a kind name and parameters."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .aggregation import median_of_three
from .basic import median_of_means, mom_blocks, sample_covariance, sample_mean, zero_covariance
from .isotonic import isotonic_clipped, pava
from .kde import EPANECHNIKOV, KERNELS, kde_bandwidth, kde_point, lepski_constants, lepski_kde
from .sgd import clipped_sgd, default_schedule
from .slope import prox_sorted_l1, slope, slope_weights
from .testing import lr_two_point

KINDS = (
    "sample_mean",
    "median_of_means",
    "sample_cov",
    "zero_cov",
    "isotonic_clipped",
    "slope",
    "kde_fixed",
    "kde_lepski",
    "clipped_sgd",
    "lr_two_point",
    "median_of_three",
)


@dataclass
class EstimatorSpec:
    """Estimator kind plus parameters; missing parameters are filled from the problem."""

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown estimator kind {self.kind!r}")

    def label(self):
        shown = {k: v for k, v in sorted(self.params.items()) if np.isscalar(v)}
        if not shown:
            return self.kind
        return self.kind + "(" + ",".join(f"{k}={v}" for k, v in shown.items()) + ")"


def _need(params, *keys):
    missing = [k for k in keys if k not in params]
    if missing:
        raise ValueError(f"missing estimator parameters: {', '.join(missing)}")


def build_estimator(spec, context=None):
    """Return a function mapping a dataset to an estimate.

    ``context`` holds problem-supplied defaults (design matrix, noise level,
    evaluation point, ...); explicit ``spec.params`` take precedence.
    """
    p = dict(context or {})
    p.update(spec.params)
    kind = spec.kind
    if kind == "sample_mean":
        return sample_mean
    if kind == "median_of_means":
        if "k" not in p:
            _need(p, "delta")
            p["k"] = mom_blocks(p["delta"])
        k = int(p["k"])
        return lambda data: median_of_means(data, k)
    if kind == "sample_cov":
        return sample_covariance
    if kind == "zero_cov":
        return lambda data: zero_covariance(np.asarray(data).shape[1])
    if kind == "isotonic_clipped":
        return isotonic_clipped
    if kind == "slope":
        _need(p, "X", "sigma")
        X, sigma, scale = p["X"], float(p["sigma"]), float(p.get("weight_scale", 6.0))
        return lambda y: slope(X, y, sigma, scale)
    if kind == "kde_fixed":
        _need(p, "x0")
        kernel = KERNELS[p.get("kernel", "epanechnikov")]
        x0 = float(p["x0"])
        if "h" in p:
            h = float(p["h"])
            return lambda data: kde_point(data, x0, h, kernel)
        _need(p, "beta", "gamma", "delta")
        consts = lepski_constants(float(p["beta"]), kernel, p.get("C1"))

        def fixed(data):
            h = kde_bandwidth(len(data), float(p["delta"]), float(p["beta"]), float(p["gamma"]), consts)
            return kde_point(data, x0, h, kernel)

        return fixed
    if kind == "kde_lepski":
        _need(p, "x0", "beta", "gamma")
        kernel = KERNELS[p.get("kernel", "epanechnikov")]
        x0, beta, gamma, C1 = float(p["x0"]), float(p["beta"]), float(p["gamma"]), p.get("C1")
        return lambda data: lepski_kde(data, x0, beta, gamma, kernel, C1)
    if kind == "clipped_sgd":
        _need(p, "R", "subgradient")
        R = float(p["R"])
        subgradient = p["subgradient"]
        dim = int(p.get("dim", 1))

        def sgd(data):
            T = len(data)
            if "step" in p and "tau" in p:
                step, tau = float(p["step"]), float(p["tau"])
            else:
                _need(p, "gamma", "delta")
                step, tau = default_schedule(T, float(p["gamma"]), R, float(p["delta"]))
                step, tau = float(p.get("step", step)), float(p.get("tau", tau))
            return clipped_sgd(lambda x, t: subgradient(x, data[t]), T, R, step, tau, dim=dim)

        return sgd
    if kind == "lr_two_point":
        _need(p, "P1", "P2", "n", "theta1", "theta2")
        return lr_two_point(p["P1"], p["P2"], int(p["n"]), p["theta1"], p["theta2"])
    # median_of_three over estimates from three disjoint thirds of the data
    _need(p, "base", "r", "loss")
    base = build_estimator(EstimatorSpec(p["base"], dict(p.get("base_params", {}))), context)
    r, loss = float(p["r"]), p["loss"]

    def aggregate(data):
        parts = np.array_split(np.asarray(data), 3)
        return median_of_three([base(part) for part in parts], r, loss)

    return aggregate


__all__ = [
    "EPANECHNIKOV",
    "EstimatorSpec",
    "KINDS",
    "build_estimator",
    "clipped_sgd",
    "default_schedule",
    "isotonic_clipped",
    "kde_bandwidth",
    "kde_point",
    "lepski_constants",
    "lepski_kde",
    "lr_two_point",
    "median_of_means",
    "median_of_three",
    "mom_blocks",
    "pava",
    "prox_sorted_l1",
    "sample_covariance",
    "sample_mean",
    "slope",
    "slope_weights",
    "zero_covariance",
]
