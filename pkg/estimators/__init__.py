"""
BatteryCap - Tomography estimators

This module provides pluggable state reconstruction from coincidence counts.
Each estimator implements the BaseEstimator interface.

Available estimators:
- linear: Least-squares inversion projected onto physical states
- mle: Cholesky-parameterized maximum likelihood (default)
"""

from .base import (
    BaseEstimator,
    EstimatorError,
    NotConverged,
    StatisticFailure,
    TomographyResult,
    UnderdeterminedSet,
    project_to_physical,
)
from .bootstrap import BootstrapEstimate, bootstrap_error_bars, bootstrap_estimates
from .linear import LinearEstimator, linear_reconstruct
from .mle import MLEEstimator

# Registry of available estimators
ESTIMATORS = {
    "linear": LinearEstimator,
    "mle": MLEEstimator,
}


def get_estimator(estimator_name: str, config: dict) -> BaseEstimator:
    """
    Factory function to get an estimator instance by name.

    Args:
        estimator_name: Name of the estimator (e.g., 'mle', 'linear')
        config: Estimator options (max_iter, grad_tol, ...)

    Returns:
        Configured estimator instance

    Raises:
        EstimatorError: If estimator is not found or configuration is invalid
    """
    if estimator_name not in ESTIMATORS:
        available = ", ".join(ESTIMATORS.keys())
        raise EstimatorError(f"Unknown estimator: {estimator_name}. Available: {available}")

    estimator = ESTIMATORS[estimator_name](config)
    is_valid, error = estimator.validate_config()
    if not is_valid:
        raise EstimatorError(f"Invalid {estimator_name} configuration: {error}")
    return estimator


def mle_reconstruct(
    records,
    init=None,
    max_iter: int = 2000,
    grad_tol: float = 1e-8,
    target=None,
    strict: bool = False,
) -> TomographyResult:
    """Convenience wrapper around MLEEstimator."""
    estimator = get_estimator("mle", {"max_iter": max_iter, "grad_tol": grad_tol})
    return estimator.reconstruct(records, target=target, strict=strict, init=init)


def list_estimators() -> list:
    """Return list of available estimator names."""
    return list(ESTIMATORS.keys())
