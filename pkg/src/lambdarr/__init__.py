"""Multi-attribute randomized response with single-parameter bistochastic matrices."""

from .estimate import (
    covariance,
    empirical_joint,
    estimate_marginal,
    estimate_true_joint,
    marginal,
    predict_covariance,
    project_to_simplex,
)
from .kron import InverseTerm, JointScheme, inverse_terms
from .matrix import DenseBistochastic, LambdaMatrix, extract_identity_weight, solve_lambda
from .randomize import SeedSpec, randomize_codes, randomize_dataset, randomize_record, transform_numeric

__all__ = [
    "DenseBistochastic",
    "InverseTerm",
    "JointScheme",
    "LambdaMatrix",
    "SeedSpec",
    "covariance",
    "empirical_joint",
    "estimate_marginal",
    "estimate_true_joint",
    "extract_identity_weight",
    "inverse_terms",
    "marginal",
    "predict_covariance",
    "project_to_simplex",
    "randomize_codes",
    "randomize_dataset",
    "randomize_record",
    "solve_lambda",
    "transform_numeric",
]
