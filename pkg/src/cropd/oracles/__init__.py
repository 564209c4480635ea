from cropd.oracles.oracle_types import OracleReport
from cropd.oracles.reference import (
    naive_contrastive,
    linear_linf_max,
    finite_diff_grad,
    logistic_regression_accuracy,
    binomial_half_width,
)

__all__ = [
    "OracleReport",
    "naive_contrastive",
    "linear_linf_max",
    "finite_diff_grad",
    "logistic_regression_accuracy",
    "binomial_half_width",
]
