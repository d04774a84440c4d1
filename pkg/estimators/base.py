"""
Base estimator interface for state tomography.

All estimators must inherit from BaseEstimator and implement the required methods.
The measurement-design helpers and project_to_physical live here so every
estimator shares one definition of the projector set.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from photonics import CountRecord, projector_stack
from qstate import (
    BatteryCapError,
    DensityMatrix,
    eigh,
    fidelity,
    matrix_from_pairs,
    validate_density,
)

PROBABILITY_FLOOR = 1e-15


class EstimatorError(BatteryCapError):
    """Exception raised for estimator-related errors."""
    pass


class UnderdeterminedSet(EstimatorError):
    """The measured projectors do not determine the density matrix."""
    pass


class NotConverged(EstimatorError):
    """The optimizer stopped early; the partial result is attached."""

    def __init__(self, message: str, result: "TomographyResult"):
        super().__init__(message)
        self.result = result


class StatisticFailure(EstimatorError):
    """A bootstrap statistic raised on one resample."""

    def __init__(self, index: int, message: str):
        super().__init__(f"Resample {index}: {message}")
        self.index = index


@dataclass(frozen=True, eq=False)
class TomographyResult:
    rho: DensityMatrix
    log_likelihood: float
    iterations: int
    converged: bool
    fidelity_to_target: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "rho": self.rho.to_pairs(),
            "log_likelihood": float(self.log_likelihood),
            "iterations": int(self.iterations),
            "converged": bool(self.converged),
            "fidelity_to_target": None if self.fidelity_to_target is None else float(self.fidelity_to_target),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TomographyResult":
        if "rho" not in data:
            raise EstimatorError("State file has no 'rho' entry")
        return cls(
            rho=validate_density(matrix_from_pairs(data["rho"])),
            log_likelihood=float(data.get("log_likelihood", 0.0)),
            iterations=int(data.get("iterations", 0)),
            converged=bool(data.get("converged", True)),
            fidelity_to_target=data.get("fidelity_to_target"),
        )


@dataclass(frozen=True, eq=False)
class MeasurementDesign:
    """
    Stacked projectors and their counts, one row per (setting, outcome).

    Tr(M Pi_k) = vec(M) . vec(Pi_k^T), so `matrix` maps vec(M) to probabilities.
    """

    projectors: np.ndarray
    counts: np.ndarray
    setting_of_row: np.ndarray

    @property
    def dim(self) -> int:
        return self.projectors.shape[1]

    @property
    def matrix(self) -> np.ndarray:
        return np.transpose(self.projectors, (0, 2, 1)).reshape(self.projectors.shape[0], -1)

    @property
    def total(self) -> float:
        return float(self.counts.sum())

    def probabilities(self, rho: np.ndarray) -> np.ndarray:
        return np.einsum("ij,kji->k", rho, self.projectors).real

    def check_complete(self) -> None:
        rank = np.linalg.matrix_rank(self.matrix)
        if rank < self.dim ** 2:
            raise UnderdeterminedSet(
                f"Projector set has rank {rank}, {self.dim ** 2} needed to determine a {self.dim}x{self.dim} state"
            )


def measurement_design(records: Sequence[CountRecord]) -> MeasurementDesign:
    if not records:
        raise UnderdeterminedSet("No count records supplied")
    settings = [record.setting for record in records]
    counts = np.array([n for record in records for n in record.counts], dtype=float)
    rows = np.repeat(np.arange(len(records)), 4)
    return MeasurementDesign(projector_stack(settings), counts, rows)


def log_likelihood(rho: np.ndarray, design: MeasurementDesign) -> float:
    """sum_k n_k ln Tr(rho Pi_k) with probabilities floored at 1e-15."""
    p = np.maximum(design.probabilities(rho), PROBABILITY_FLOOR)
    return float(np.dot(design.counts, np.log(p)))


def _simplex_projection(values: np.ndarray) -> np.ndarray:
    """Euclidean projection of a real vector onto {x >= 0, sum x = 1}."""
    u = np.sort(values)[::-1]
    css = np.cumsum(u)
    index = np.arange(1, len(u) + 1)
    support = np.nonzero(u - (css - 1.0) / index > 0)[0][-1]
    shift = (css[support] - 1.0) / (support + 1)
    return np.maximum(values - shift, 0.0)


def project_to_physical(matrix) -> DensityMatrix:
    """
    Nearest (Frobenius) density matrix to a possibly unphysical estimate.

    The Hermitian part is diagonalized and its spectrum projected onto the
    probability simplex, which clips negative eigenvalues and rebalances the
    trace.
    """
    m = np.asarray(matrix, dtype=complex)
    decomposition = eigh((m + m.conj().T) / 2)
    weights = _simplex_projection(decomposition.eigenvalues)
    v = decomposition.eigenvectors
    return validate_density((v * weights) @ v.conj().T)


class BaseEstimator(ABC):
    """
    Abstract base class for tomography estimators.

    All estimators must implement:
    - reconstruct(): Turn count records into a TomographyResult
    - validate_config(): Check if the estimator configuration is valid
    """

    def __init__(self, config: dict):
        """
        Initialize the estimator with configuration.

        Args:
            config: Estimator-specific configuration dictionary
        """
        self.config = config

    @property
    @abstractmethod
    def name(self) -> str:
        """Human-readable name of the estimator."""
        pass

    @property
    @abstractmethod
    def description(self) -> str:
        """Short description of the estimator."""
        pass

    @abstractmethod
    def validate_config(self) -> tuple[bool, Optional[str]]:
        """
        Validate the estimator configuration.

        Returns:
            Tuple of (is_valid, error_message)
        """
        pass

    @abstractmethod
    def reconstruct(
        self,
        records: Sequence[CountRecord],
        target: Optional[DensityMatrix] = None,
        strict: bool = False,
    ) -> TomographyResult:
        """
        Reconstruct a physical state from coincidence counts.

        Args:
            records: Count records covering an informationally complete set
            target: Optional state to report the fidelity against
            strict: Raise NotConverged instead of returning a partial result

        Raises:
            UnderdeterminedSet: If the records do not determine the state
            NotConverged: Only when strict is set
        """
        pass

    def target_fidelity(self, rho: DensityMatrix, target: Optional[DensityMatrix]) -> Optional[float]:
        return None if target is None else fidelity(rho, target)
