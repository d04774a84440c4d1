"""
BatteryCap - Battery quantities

Ergotropy, antiergotropy and capacity of a quantum battery under cyclic
unitary driving, the two-level closed form, the bipartite capacity gap, and
a brute-force unitary-orbit oracle used to check the rearrangement formulas.

The passive state pairs the largest eigenvalue of rho with the lowest level
of H; the active state pairs it with the highest level.
"""

import itertools
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np
from scipy.stats import unitary_group

from qstate import (
    BatteryCapError,
    DensityMatrix,
    DimensionMismatch,
    ObservableHamiltonian,
    composite_hamiltonian,
    expectation,
    partial_trace,
    qubit_state,
    validate_density,
)

CLAMP_TOLERANCE = 1e-10

# Polarization basis: index 0 is |H>, index 1 is |V>
POLARIZATION_H = np.array([1, 0], dtype=complex)
POLARIZATION_V = np.array([0, 1], dtype=complex)


class InvalidParams(BatteryCapError):
    pass


class InternalConsistencyError(BatteryCapError):
    pass


@dataclass(frozen=True)
class BatteryQuantities:
    ergotropy: float
    antiergotropy: float
    capacity: float
    passive_energy: float
    active_energy: float
    initial_energy: float

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class QubitBatteryParams:
    """Two-level state parameters: |1> population p, coherence modulus r, phase."""

    p: float
    r: float
    theta_phase: float = 0.0

    def validate(self) -> tuple[bool, Optional[str]]:
        if not 0.0 <= self.p <= 1.0:
            return False, f"p = {self.p} outside [0, 1]"
        if self.r < 0.0:
            return False, f"r = {self.r} is negative"
        if self.r ** 2 > self.p * (1 - self.p) + 1e-12:
            return False, f"r^2 = {self.r ** 2:.6g} exceeds p(1-p) = {self.p * (1 - self.p):.6g}"
        return True, None

    def to_density(self) -> DensityMatrix:
        is_valid, error = self.validate()
        if not is_valid:
            raise InvalidParams(error)
        return qubit_state(self.p, self.r, self.theta_phase)


def polarization_hamiltonian(unit_energy: float = 1.0) -> ObservableHamiltonian:
    """E|H><H| on the (H, V) basis: |V> is the ground level, |H> the excited one."""
    basis = np.column_stack([POLARIZATION_V, POLARIZATION_H])
    return ObservableHamiltonian(float(unit_energy), np.array([0.0, 1.0]), basis)


def _check_dims(rho: DensityMatrix, hamiltonian: ObservableHamiltonian) -> None:
    if rho.dim != hamiltonian.dim:
        raise DimensionMismatch(f"State dimension {rho.dim} does not match Hamiltonian dimension {hamiltonian.dim}")


def _rearranged(rho: DensityMatrix, hamiltonian: ObservableHamiltonian, reverse: bool) -> DensityMatrix:
    _check_dims(rho, hamiltonian)
    weights = rho.eigenvalues()
    if reverse:
        weights = weights[::-1]
    v = hamiltonian.eigenbasis
    return validate_density((v * weights) @ v.conj().T)


def passive_state(rho: DensityMatrix, hamiltonian: ObservableHamiltonian) -> DensityMatrix:
    """rho_down = sum_i lambda_i |eps_{d-1-i}><eps_{d-1-i}| (both ascending)."""
    return _rearranged(rho, hamiltonian, reverse=True)


def active_state(rho: DensityMatrix, hamiltonian: ObservableHamiltonian) -> DensityMatrix:
    """rho_up = sum_i lambda_i |eps_i><eps_i| (both ascending)."""
    return _rearranged(rho, hamiltonian, reverse=False)


def passive_energy(rho: DensityMatrix, hamiltonian: ObservableHamiltonian) -> float:
    _check_dims(rho, hamiltonian)
    return float(np.dot(rho.eigenvalues(), hamiltonian.energies[::-1]))


def active_energy(rho: DensityMatrix, hamiltonian: ObservableHamiltonian) -> float:
    _check_dims(rho, hamiltonian)
    return float(np.dot(rho.eigenvalues(), hamiltonian.energies))


def _clamp(value: float, what: str, scale: float) -> float:
    if value >= 0.0:
        return value
    if value < -CLAMP_TOLERANCE * scale:
        raise InternalConsistencyError(f"{what} is negative beyond roundoff: {value:.3e}")
    return 0.0


def _energy_scale(hamiltonian: ObservableHamiltonian) -> float:
    return max(1.0, float(np.max(np.abs(hamiltonian.energies))))


def ergotropy(rho: DensityMatrix, hamiltonian: ObservableHamiltonian) -> float:
    """Maximum work extractable by cyclic unitary driving, Tr(rho H) - Tr(rho_down H)."""
    value = expectation(rho, hamiltonian) - passive_energy(rho, hamiltonian)
    return _clamp(value, "Ergotropy", _energy_scale(hamiltonian))


def antiergotropy(rho: DensityMatrix, hamiltonian: ObservableHamiltonian) -> float:
    """Maximum work that can be stored by cyclic unitary driving, Tr(rho_up H) - Tr(rho H)."""
    value = active_energy(rho, hamiltonian) - expectation(rho, hamiltonian)
    return _clamp(value, "Antiergotropy", _energy_scale(hamiltonian))


def capacity(rho: DensityMatrix, hamiltonian: ObservableHamiltonian) -> BatteryQuantities:
    """
    Ergotropy, antiergotropy and their sum, the battery capacity.

    The capacity equals Tr(rho_up H) - Tr(rho_down H), so it only depends on
    the spectrum of rho and the levels of H. It is never negative: for the
    photon of the source at angle theta it is |cos 2 theta| E, so theta = 60
    gives E/2, not -E/2.
    """
    initial = expectation(rho, hamiltonian)
    low = passive_energy(rho, hamiltonian)
    high = active_energy(rho, hamiltonian)
    scale = _energy_scale(hamiltonian)
    extractable = _clamp(initial - low, "Ergotropy", scale)
    storable = _clamp(high - initial, "Antiergotropy", scale)
    return BatteryQuantities(
        ergotropy=extractable,
        antiergotropy=storable,
        capacity=extractable + storable,
        passive_energy=low,
        active_energy=high,
        initial_energy=initial,
    )


def qubit_capacity_closed_form(params: QubitBatteryParams, unit_energy: float = 1.0) -> float:
    """E * Delta with Delta^2 = (2p - 1)^2 + 4 r^2."""
    is_valid, error = params.validate()
    if not is_valid:
        raise InvalidParams(error)
    delta = np.sqrt((2 * params.p - 1) ** 2 + 4 * params.r ** 2)
    return float(unit_energy * delta)


def _qubit_eigenvalues(params: QubitBatteryParams) -> tuple[float, float]:
    delta = qubit_capacity_closed_form(params, 1.0)
    return (1 - delta) / 2, (1 + delta) / 2


def qubit_ergotropy(params: QubitBatteryParams, unit_energy: float = 1.0) -> float:
    """E (p - lambda_minus)."""
    low, _ = _qubit_eigenvalues(params)
    return float(unit_energy * max(params.p - low, 0.0))


def qubit_antiergotropy(params: QubitBatteryParams, unit_energy: float = 1.0) -> float:
    """E (lambda_plus - p)."""
    _, high = _qubit_eigenvalues(params)
    return float(unit_energy * max(high - params.p, 0.0))


def capacity_gap(
    rho_ab: DensityMatrix,
    h_a: ObservableHamiltonian,
    h_b: ObservableHamiltonian,
) -> float:
    """
    Global capacity minus the sum of local capacities.

    Reported signed; no sign is enforced for general mixed states.
    """
    if h_a.dim != 2 or h_b.dim != 2:
        raise DimensionMismatch(f"capacity_gap needs qubit Hamiltonians, got {h_a.dim} and {h_b.dim}")
    if rho_ab.dim != 4:
        raise DimensionMismatch(f"capacity_gap needs a two-qubit state, got dimension {rho_ab.dim}")
    h_ab = composite_hamiltonian(h_a, h_b)
    global_capacity = capacity(rho_ab, h_ab).capacity
    local_a = capacity(partial_trace(rho_ab, "A"), h_a).capacity
    local_b = capacity(partial_trace(rho_ab, "B"), h_b).capacity
    return global_capacity - local_a - local_b


def permutation_unitaries(rho: DensityMatrix, hamiltonian: ObservableHamiltonian) -> list[np.ndarray]:
    """All d! unitaries mapping the eigenvectors of rho onto the energy eigenbasis."""
    _check_dims(rho, hamiltonian)
    state_vectors = rho.spectrum().eigenvectors
    energy_vectors = hamiltonian.eigenbasis
    unitaries = []
    for perm in itertools.permutations(range(rho.dim)):
        unitaries.append(energy_vectors[:, list(perm)] @ state_vectors.conj().T)
    return unitaries


def brute_force_work_extrema(
    rho: DensityMatrix,
    hamiltonian: ObservableHamiltonian,
    n_samples: int,
    seed: int = 0,
) -> tuple[float, float]:
    """
    Extreme energies Tr(U rho U^dagger H) over sampled unitaries.

    Samples Haar unitaries and always includes the d! eigenbasis
    permutations, so the passive and active energies are attained exactly.

    Returns:
        (min_energy, max_energy)
    """
    if n_samples < 1:
        raise InvalidParams(f"n_samples must be >= 1, got {n_samples}")
    _check_dims(rho, hamiltonian)

    rng = np.random.default_rng(seed)
    h = hamiltonian.matrix
    m = rho.matrix
    sampled = unitary_group.rvs(rho.dim, size=n_samples, random_state=rng)
    stack = np.concatenate(
        [np.asarray(permutation_unitaries(rho, hamiltonian)), np.reshape(sampled, (n_samples, rho.dim, rho.dim))]
    )
    driven = stack @ m @ np.conj(np.transpose(stack, (0, 2, 1)))
    energies = np.einsum("nij,ji->n", driven, h).real
    return float(energies.min()), float(energies.max())
