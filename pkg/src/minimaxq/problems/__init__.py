"""Worked examples: hypothesis families, closed-form bounds and samplers."""

from .base import Hypothesis, ProblemInstance, check_grid, kl_budget
from .catoni import catoni_adversary, catoni_law
from .covariance import covariance_opnorm
from .density import DensityPair, bump_holder_norm, density_point
from .gaussian import gaussian_mean_linf, gaussian_mean_sq, huber_core_laws, robust_mean_huber
from .isotonic import isotonic
from .sco import optimality_gap, population_objective, sco_hard_instance
from .sparse import gaussian_design, sparse_regression

REGISTRY = {
    "gaussian_mean_sq": gaussian_mean_sq,
    "robust_mean_huber": robust_mean_huber,
    "gaussian_mean_linf": gaussian_mean_linf,
    "covariance_opnorm": covariance_opnorm,
    "sparse_regression": sparse_regression,
    "density_point": density_point,
    "isotonic": isotonic,
    "sco_hard_instance": sco_hard_instance,
    "catoni_adversary": catoni_adversary,
}

__all__ = [
    "DensityPair",
    "Hypothesis",
    "ProblemInstance",
    "REGISTRY",
    "bump_holder_norm",
    "catoni_adversary",
    "catoni_law",
    "check_grid",
    "covariance_opnorm",
    "density_point",
    "gaussian_design",
    "gaussian_mean_linf",
    "gaussian_mean_sq",
    "huber_core_laws",
    "isotonic",
    "kl_budget",
    "optimality_gap",
    "population_objective",
    "robust_mean_huber",
    "sco_hard_instance",
    "sparse_regression",
]
