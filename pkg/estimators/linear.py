"""
Linear inversion estimator.

Solves Tr(M Pi_k) = p_k by least squares over all projectors, with p_k the
per-setting relative frequencies. The result can be slightly unphysical at
finite counts; the estimator projects it back to a density matrix.
"""

from typing import Optional, Sequence

import numpy as np

from photonics import CountRecord, joint_probability
from qstate import DensityMatrix

from .base import (
    BaseEstimator,
    TomographyResult,
    log_likelihood,
    measurement_design,
    project_to_physical,
)


def linear_reconstruct(records: Sequence[CountRecord]) -> np.ndarray:
    """
    Least-squares state estimate, Hermitized and trace-normalized.

    Returns:
        Complex matrix, possibly with small negative eigenvalues

    Raises:
        UnderdeterminedSet: If the projectors are not informationally complete
        EmptyRecord: If a setting has no coincidences
    """
    design = measurement_design(records)
    design.check_complete()
    frequencies = np.concatenate([joint_probability(record) for record in records])

    solution, *_ = np.linalg.lstsq(design.matrix, frequencies.astype(complex), rcond=None)
    d = design.dim
    m = solution.reshape(d, d)
    m = (m + m.conj().T) / 2
    return m / np.trace(m).real


class LinearEstimator(BaseEstimator):
    """
    Linear inversion followed by projection onto the physical states.

    Configuration: none.
    """

    @property
    def name(self) -> str:
        return "Linear inversion"

    @property
    def description(self) -> str:
        return "Least-squares inversion projected onto physical states"

    def validate_config(self) -> tuple[bool, Optional[str]]:
        return True, None

    def reconstruct(
        self,
        records: Sequence[CountRecord],
        target: Optional[DensityMatrix] = None,
        strict: bool = False,
    ) -> TomographyResult:
        rho = project_to_physical(linear_reconstruct(records))
        design = measurement_design(records)
        return TomographyResult(
            rho=rho,
            log_likelihood=log_likelihood(rho.matrix, design) / design.total,
            iterations=0,
            converged=True,
            fidelity_to_target=self.target_fidelity(rho, target),
        )
