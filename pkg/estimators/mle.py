"""
Maximum-likelihood estimator.

The state is parameterized as rho = T^dagger T / Tr(T^dagger T) with T
lower-triangular, real on the diagonal. That is 16 real parameters for a
two-photon state, and every parameter vector maps to a physical state.
The normalized log-likelihood sum_k n_k ln Tr(rho Pi_k) / N is maximized
with L-BFGS-B using its analytic gradient.
"""

import logging
from typing import Optional, Sequence, Union

import numpy as np
from scipy.optimize import minimize

from photonics import CountRecord
from qstate import DensityMatrix, DimensionMismatch, validate_density

from .base import (
    PROBABILITY_FLOOR,
    BaseEstimator,
    EstimatorError,
    MeasurementDesign,
    NotConverged,
    TomographyResult,
    measurement_design,
    project_to_physical,
)
from .linear import linear_reconstruct

logger = logging.getLogger(__name__)

DEFAULT_MAX_ITER = 2000
DEFAULT_GRAD_TOL = 1e-8
INIT_MIXING = 1e-6
STALL_ITERATIONS = 10
STALL_TOLERANCE = 1e-14


class CholeskyParameterization:
    """Maps between real parameter vectors and lower-triangular T."""

    def __init__(self, dim: int):
        self.dim = dim
        self.lower = np.tril_indices(dim, -1)
        self.n_offdiag = len(self.lower[0])

    @property
    def size(self) -> int:
        return self.dim + 2 * self.n_offdiag

    def to_matrix(self, params: np.ndarray) -> np.ndarray:
        d, k = self.dim, self.n_offdiag
        t = np.zeros((d, d), dtype=complex)
        t[np.diag_indices(d)] = params[:d]
        t[self.lower] = params[d:d + k] + 1j * params[d + k:]
        return t

    def from_state(self, rho: np.ndarray) -> np.ndarray:
        """Parameters of a positive-definite state, via T = J L^dagger J with J rho J = L L^dagger."""
        exchange = np.eye(self.dim)[::-1]
        chol = np.linalg.cholesky(exchange @ rho @ exchange)
        t = exchange @ chol.conj().T @ exchange
        return self.flatten(t)

    def flatten(self, t: np.ndarray) -> np.ndarray:
        off = t[self.lower]
        return np.concatenate([np.diag(t).real, off.real, off.imag])

    def flatten_gradient(self, k: np.ndarray) -> np.ndarray:
        """d/dRe T_ij = 2 Re K_ij, d/dIm T_ij = -2 Im K_ij."""
        off = k[self.lower]
        return np.concatenate([2 * np.diag(k).real, 2 * off.real, -2 * off.imag])


class LikelihoodModel:
    """
    Normalized log-likelihood of a parameter vector and its gradient.

    With R = sum_k n_k Pi_k / p_k and G = (R - N I) / Tr(T^dagger T), the
    derivative with respect to T is K = (G T^dagger)^T.
    """

    def __init__(self, design: MeasurementDesign):
        self.design = design
        self.parameterization = CholeskyParameterization(design.dim)
        self.total = design.total
        if self.total <= 0:
            raise EstimatorError("No coincidences in any setting")

    def state(self, params: np.ndarray) -> np.ndarray:
        t = self.parameterization.to_matrix(params)
        unnormalized = t.conj().T @ t
        return unnormalized / np.trace(unnormalized).real

    def log_likelihood(self, params: np.ndarray) -> float:
        return self.value_and_gradient(params)[0]

    def gradient(self, params: np.ndarray) -> np.ndarray:
        return self.value_and_gradient(params)[1]

    def value_and_gradient(self, params: np.ndarray) -> tuple[float, np.ndarray]:
        t = self.parameterization.to_matrix(params)
        unnormalized = t.conj().T @ t
        tau = np.trace(unnormalized).real
        p = np.maximum(self.design.probabilities(unnormalized / tau), PROBABILITY_FLOOR)
        value = float(np.dot(self.design.counts, np.log(p))) / self.total

        r = np.einsum("k,kij->ij", self.design.counts / p, self.design.projectors)
        g = (r - self.total * np.eye(self.design.dim)) / tau
        k = (g @ t.conj().T).T
        return value, self.parameterization.flatten_gradient(k) / self.total


class MLEEstimator(BaseEstimator):
    """
    Cholesky-parameterized maximum likelihood.

    Configuration:
        max_iter: Optimizer iteration limit (default: 2000)
        grad_tol: Gradient max-norm that counts as converged (default: 1e-8)
    """

    @property
    def name(self) -> str:
        return "Maximum likelihood"

    @property
    def description(self) -> str:
        return "Physical-by-construction T^dagger T likelihood fit (L-BFGS-B)"

    @property
    def max_iter(self) -> int:
        return int(self.config.get("max_iter", DEFAULT_MAX_ITER))

    @property
    def grad_tol(self) -> float:
        return float(self.config.get("grad_tol", DEFAULT_GRAD_TOL))

    def validate_config(self) -> tuple[bool, Optional[str]]:
        try:
            max_iter, grad_tol = self.max_iter, self.grad_tol
        except (TypeError, ValueError) as e:
            return False, f"Invalid estimator option: {e}"
        if max_iter < 1:
            return False, f"max_iter must be >= 1, got {max_iter}"
        if not grad_tol > 0:
            return False, f"grad_tol must be positive, got {grad_tol}"
        return True, None

    @staticmethod
    def floored(rho: np.ndarray) -> np.ndarray:
        """rho mixed with eps I and renormalized, so its Cholesky factor exists."""
        rho = rho + INIT_MIXING * np.eye(rho.shape[0])
        return rho / np.trace(rho).real

    def initial_state(
        self, records: Sequence[CountRecord], init: Union[DensityMatrix, np.ndarray, None] = None
    ) -> np.ndarray:
        """
        Starting point of the search: `init` if given, otherwise the projected
        linear estimate. Either way it is floored to full rank.

        Raises:
            QuantumStateError: If init is not a density matrix
        """
        if init is None:
            rho = project_to_physical(linear_reconstruct(records)).matrix
        elif isinstance(init, DensityMatrix):
            rho = init.matrix
        else:
            rho = validate_density(init).matrix
        return self.floored(rho)

    def reconstruct(
        self,
        records: Sequence[CountRecord],
        target: Optional[DensityMatrix] = None,
        strict: bool = False,
        init: Union[DensityMatrix, np.ndarray, None] = None,
    ) -> TomographyResult:
        is_valid, error = self.validate_config()
        if not is_valid:
            raise EstimatorError(error)

        design = measurement_design(records)
        design.check_complete()
        model = LikelihoodModel(design)
        start = self.initial_state(records, init)
        if start.shape[0] != model.parameterization.dim:
            raise DimensionMismatch(
                f"Initial state has dimension {start.shape[0]}, records need {model.parameterization.dim}"
            )
        x0 = model.parameterization.from_state(start)

        history = [model.log_likelihood(x0)]
        stalled = [0]

        def objective(params):
            value, grad = model.value_and_gradient(params)
            return -value, -grad

        def track(intermediate_result):
            value = -float(intermediate_result.fun)
            previous = history[-1]
            if value < previous - 1e-12 * max(1.0, abs(previous)):
                raise EstimatorError(
                    f"Likelihood decreased from {previous:.12g} to {value:.12g} at iteration {len(history)}"
                )
            history.append(value)
            stalled[0] = stalled[0] + 1 if value - previous <= STALL_TOLERANCE else 0
            if stalled[0] >= STALL_ITERATIONS:
                raise StopIteration

        logger.info("MLE started: %d projectors, %d counts", design.projectors.shape[0], int(design.total))
        solution = minimize(
            objective,
            x0,
            jac=True,
            method="L-BFGS-B",
            callback=track,
            options={"maxiter": self.max_iter, "ftol": 0.0, "gtol": self.grad_tol},
        )

        grad_norm = float(np.max(np.abs(model.gradient(solution.x))))
        converged = grad_norm <= self.grad_tol or stalled[0] >= STALL_ITERATIONS
        rho = validate_density(model.state(solution.x))
        result = TomographyResult(
            rho=rho,
            log_likelihood=model.log_likelihood(solution.x),
            iterations=int(solution.nit),
            converged=converged,
            fidelity_to_target=self.target_fidelity(rho, target),
        )
        logger.info("MLE finished after %d iterations, gradient norm %.3e", result.iterations, grad_norm)

        if not converged:
            message = f"MLE stopped after {result.iterations} iterations with gradient norm {grad_norm:.3e}"
            if strict:
                raise NotConverged(message, result)
            logger.warning(message)
        return result
