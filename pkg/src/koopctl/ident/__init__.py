"""Regressors, models and estimators for linear and bilinear Koopman models."""

from .batch import batch_least_squares, regularized_least_squares
from .estimator import EstimationLog, RlsEstimator, StepResult, rls_step
from .models import (BilinearKoopmanModel, LinearKoopmanModel, compute_f0_reference,
                     model_from_theta, predict, regressor_dim)
from .regressors import (BilinearLayout, OperatingPoint, RegressorSample,
                         bilinear_regressor, build_bilinear_regressor,
                         build_linear_regressor, linear_regressor)


__all__ = [
    "BilinearKoopmanModel", "BilinearLayout", "EstimationLog", "LinearKoopmanModel",
    "OperatingPoint", "RegressorSample", "RlsEstimator", "StepResult",
    "batch_least_squares", "bilinear_regressor", "build_bilinear_regressor",
    "build_linear_regressor", "compute_f0_reference", "linear_regressor",
    "model_from_theta", "predict", "regressor_dim", "regularized_least_squares",
    "rls_step",
]
