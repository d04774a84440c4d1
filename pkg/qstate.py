"""
BatteryCap - Quantum state primitives

Complex-Hermitian linear algebra shared by every other module: density
matrices, bare Hamiltonians, spectral decompositions, partial traces,
fidelity and unitary driving.

Tensor products are row-major with subsystem A as the left factor, so a
two-photon state is indexed (HH, HV, VH, VV).
"""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.linalg
from scipy.stats import unitary_group

TOL_HERMITIAN = 1e-10
TOL_TRACE = 1e-10
TOL_POSITIVE = 1e-10
TOL_UNITARY = 1e-10
TOL_RECONSTRUCTION = 1e-9


class BatteryCapError(Exception):
    """Base class for every error raised by BatteryCap."""
    pass


class QuantumStateError(BatteryCapError):
    """Exception raised for invalid states and operators."""
    pass


class NotHermitian(QuantumStateError):
    pass


class TraceNotOne(QuantumStateError):
    pass


class NotPositive(QuantumStateError):
    pass


class DimensionMismatch(QuantumStateError):
    pass


class NotUnitary(QuantumStateError):
    pass


class ConvergenceFailure(QuantumStateError):
    pass


def as_matrix(matrix) -> np.ndarray:
    """Coerce input to a square, finite complex matrix."""
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"Expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise QuantumStateError("Matrix has NaN or Inf entries")
    return m


def hermiticity_error(matrix: np.ndarray) -> float:
    """Largest entrywise |M - M^dagger|."""
    return float(np.max(np.abs(matrix - matrix.conj().T)))


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Eigenvalues in ascending order and the unitary of eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """
    A validated quantum state.

    Build through validate_density() (or the helpers below) so that the
    Hermitian, unit-trace and positivity invariants are guaranteed.
    """

    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def spectrum(self) -> SpectralDecomposition:
        return eigh(self.matrix)

    def eigenvalues(self) -> np.ndarray:
        """Ascending eigenvalues with slack residues in (-1e-10, 0) clamped to 0."""
        values = scipy.linalg.eigvalsh(self.matrix)
        if values[0] < -TOL_POSITIVE:
            raise NotPositive(f"Eigenvalue {values[0]:.3e} below -{TOL_POSITIVE:g}")
        return np.clip(values, 0.0, None)

    def to_pairs(self) -> list:
        """Row-major [re, im] pairs for JSON output."""
        return matrix_to_pairs(self.matrix)


def matrix_to_pairs(matrix: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(matrix)]


def matrix_from_pairs(pairs) -> np.ndarray:
    arr = np.asarray(pairs, dtype=float)
    if arr.ndim != 3 or arr.shape[-1] != 2:
        raise QuantumStateError(f"Expected an n x n array of [re, im] pairs, got shape {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def validate_density(matrix) -> DensityMatrix:
    """
    Check the density-matrix invariants and wrap the matrix.

    Args:
        matrix: Square complex matrix (anything numpy can convert)

    Returns:
        DensityMatrix

    Raises:
        NotHermitian: If max |M - M^dagger| exceeds 1e-10
        TraceNotOne: If |Tr M - 1| exceeds 1e-10
        NotPositive: If the smallest eigenvalue is below -1e-10
    """
    m = as_matrix(matrix)

    herm = hermiticity_error(m)
    if herm > TOL_HERMITIAN:
        raise NotHermitian(f"Matrix is not Hermitian: max |M - M^dagger| = {herm:.3e}")

    trace = np.trace(m).real
    if abs(trace - 1.0) > TOL_TRACE:
        raise TraceNotOne(f"Trace is {trace:.12g}, deviation {abs(trace - 1.0):.3e}")

    smallest = scipy.linalg.eigvalsh(m)[0]
    if smallest < -TOL_POSITIVE:
        raise NotPositive(f"Matrix has negative eigenvalue {smallest:.3e}")

    # Store the exactly Hermitian part so downstream eigensolvers see clean input
    m = (m + m.conj().T) / 2
    m.setflags(write=False)
    return DensityMatrix(m)


def eigh(matrix) -> SpectralDecomposition:
    """
    Hermitian eigendecomposition with ascending eigenvalues.

    Raises:
        NotHermitian: If the input is not Hermitian within tolerance
        ConvergenceFailure: If LAPACK fails or the reconstruction check fails
    """
    m = as_matrix(matrix)
    herm = hermiticity_error(m)
    if herm > TOL_HERMITIAN:
        raise NotHermitian(f"eigh needs a Hermitian matrix: max |M - M^dagger| = {herm:.3e}")

    try:
        values, vectors = scipy.linalg.eigh((m + m.conj().T) / 2)
    except scipy.linalg.LinAlgError as e:
        raise ConvergenceFailure(f"Eigensolver did not converge: {e}")

    decomposition = SpectralDecomposition(values, vectors)
    scale = max(1.0, float(np.max(np.abs(m))))
    error = float(np.max(np.abs(decomposition.reconstruct() - m)))
    if error > TOL_RECONSTRUCTION * scale:
        raise ConvergenceFailure(f"Eigendecomposition reconstruction error {error:.3e}")
    return decomposition


@dataclass(frozen=True, eq=False)
class ObservableHamiltonian:
    """
    Bare Hamiltonian H = sum_i eps_i E |eps_i><eps_i|.

    Attributes:
        unit_energy: E > 0
        eigenenergies: Dimensionless levels eps_i in ascending order
        eigenbasis: Unitary whose columns are |eps_i>
    """

    unit_energy: float
    eigenenergies: np.ndarray
    eigenbasis: np.ndarray

    def __post_init__(self):
        if not self.unit_energy > 0:
            raise QuantumStateError(f"Unit energy must be positive, got {self.unit_energy}")
        levels = np.asarray(self.eigenenergies, dtype=float)
        basis = as_matrix(self.eigenbasis)
        if levels.shape != (basis.shape[0],):
            raise DimensionMismatch(
                f"{levels.shape[0]} levels for a {basis.shape[0]}-dimensional basis"
            )
        if np.any(np.diff(levels) < 0):
            raise QuantumStateError(f"Eigenenergies must be ascending, got {levels}")
        check_unitary(basis, what="Hamiltonian eigenbasis")
        object.__setattr__(self, "eigenenergies", levels)
        object.__setattr__(self, "eigenbasis", basis)

    @property
    def dim(self) -> int:
        return self.eigenenergies.shape[0]

    @property
    def energies(self) -> np.ndarray:
        """Level energies eps_i * E in energy units."""
        return self.eigenenergies * self.unit_energy

    @property
    def matrix(self) -> np.ndarray:
        v = self.eigenbasis
        return (v * self.energies) @ v.conj().T

    @classmethod
    def from_levels(
        cls,
        levels: Sequence[float],
        unit_energy: float = 1.0,
        basis: Optional[np.ndarray] = None,
    ) -> "ObservableHamiltonian":
        """Hamiltonian with the given levels, diagonal in `basis` (default: computational)."""
        levels = np.asarray(levels, dtype=float)
        if basis is None:
            basis = np.eye(levels.shape[0], dtype=complex)
        order = np.argsort(levels, kind="stable")
        basis = np.asarray(basis, dtype=complex)[:, order]
        return cls(float(unit_energy), levels[order], basis)

    @classmethod
    def from_matrix(cls, matrix, unit_energy: float = 1.0) -> "ObservableHamiltonian":
        """Diagonalize an energy matrix and express its levels in units of E."""
        decomposition = eigh(matrix)
        return cls(float(unit_energy), decomposition.eigenvalues / unit_energy, decomposition.eigenvectors)


def composite_hamiltonian(h_a: ObservableHamiltonian, h_b: ObservableHamiltonian) -> ObservableHamiltonian:
    """H_A (x) I + I (x) H_B for two non-interacting subsystems."""
    if h_a.unit_energy != h_b.unit_energy:
        total = np.kron(h_a.matrix, np.eye(h_b.dim)) + np.kron(np.eye(h_a.dim), h_b.matrix)
        return ObservableHamiltonian.from_matrix(total, h_a.unit_energy)

    levels = np.add.outer(h_a.eigenenergies, h_b.eigenenergies).ravel()
    basis = np.kron(h_a.eigenbasis, h_b.eigenbasis)
    return ObservableHamiltonian.from_levels(levels, h_a.unit_energy, basis)


def check_unitary(u: np.ndarray, what: str = "Operator") -> None:
    error = float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))
    if error > TOL_UNITARY:
        raise NotUnitary(f"{what} is not unitary: max |U^dagger U - I| = {error:.3e}")


def _check_dims(a: int, b: int, what: str) -> None:
    if a != b:
        raise DimensionMismatch(f"{what}: dimension {a} does not match {b}")


def expectation(rho: DensityMatrix, hamiltonian: ObservableHamiltonian) -> float:
    """Tr(rho H) in energy units."""
    _check_dims(rho.dim, hamiltonian.dim, "expectation")
    value = np.trace(rho.matrix @ hamiltonian.matrix)
    scale = max(1.0, float(np.max(np.abs(hamiltonian.energies))))
    if abs(value.imag) > TOL_HERMITIAN * scale:
        raise NotHermitian(f"Tr(rho H) has imaginary part {value.imag:.3e}")
    return float(value.real)


def partial_trace(rho: DensityMatrix, keep: str = "A", dims: tuple[int, int] = (2, 2)) -> DensityMatrix:
    """
    Reduced state of one party of a bipartite state.

    Args:
        rho: Bipartite state on A (x) B, A the left factor
        keep: "A" or "B"
        dims: (d_A, d_B)
    """
    d_a, d_b = dims
    _check_dims(rho.dim, d_a * d_b, "partial_trace")
    blocks = rho.matrix.reshape(d_a, d_b, d_a, d_b)
    if keep == "A":
        reduced = np.einsum("ijkj->ik", blocks)
    elif keep == "B":
        reduced = np.einsum("ijik->jk", blocks)
    else:
        raise QuantumStateError(f"Unknown subsystem '{keep}', expected 'A' or 'B'")
    return validate_density(reduced)


def _psd_sqrt(matrix: np.ndarray) -> np.ndarray:
    values, vectors = scipy.linalg.eigh(matrix)
    return (vectors * np.sqrt(np.clip(values, 0.0, None))) @ vectors.conj().T


def fidelity(rho1: DensityMatrix, rho2: DensityMatrix) -> float:
    """Uhlmann fidelity (Tr sqrt(sqrt(rho1) rho2 sqrt(rho1)))^2, clipped to [0, 1]."""
    _check_dims(rho1.dim, rho2.dim, "fidelity")
    root = _psd_sqrt(rho1.matrix)
    inner = root @ rho2.matrix @ root
    values = scipy.linalg.eigvalsh((inner + inner.conj().T) / 2)
    # roundoff-level eigenvalues would otherwise add ~1e-8 each through the sqrt
    values[values < 1e-14] = 0.0
    value = float(np.sum(np.sqrt(values)) ** 2)
    return min(max(value, 0.0), 1.0)


def tensor(rho_a: DensityMatrix, rho_b: DensityMatrix) -> DensityMatrix:
    return validate_density(np.kron(rho_a.matrix, rho_b.matrix))


def apply_unitary(rho: DensityMatrix, u) -> DensityMatrix:
    """Cyclic driving rho -> U rho U^dagger."""
    u = as_matrix(u)
    _check_dims(rho.dim, u.shape[0], "apply_unitary")
    check_unitary(u)
    return validate_density(u @ rho.matrix @ u.conj().T)


def ket_to_density(psi) -> DensityMatrix:
    psi = np.asarray(psi, dtype=complex).ravel()
    psi = psi / np.linalg.norm(psi)
    return validate_density(np.outer(psi, psi.conj()))


def qubit_state(p: float, r: float, phase: float = 0.0) -> DensityMatrix:
    """[[1-p, r e^{i phase}], [r e^{-i phase}, p]] with p the |1> population."""
    off = r * np.exp(1j * phase)
    return validate_density(np.array([[1 - p, off], [np.conj(off), p]], dtype=complex))


def qubit_matrices(p, r, phase=0.0) -> np.ndarray:
    """Unvalidated stack of qubit_state matrices, shape (n, 2, 2)."""
    p, r, phase = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (p, r, phase)))
    off = r * np.exp(1j * phase)
    m = np.empty(p.shape + (2, 2), dtype=complex)
    m[..., 0, 0] = 1 - p
    m[..., 0, 1] = off
    m[..., 1, 0] = np.conj(off)
    m[..., 1, 1] = p
    return m


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary."""
    return unitary_group.rvs(dim, random_state=rng)


def random_density(dim: int, rng: np.random.Generator, rank: Optional[int] = None) -> DensityMatrix:
    """Random state from a Ginibre matrix G, rho = G G^dagger / Tr."""
    rank = rank or dim
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    m = g @ g.conj().T
    return validate_density(m / np.trace(m).real)
