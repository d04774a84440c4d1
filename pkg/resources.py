"""
BatteryCap - Entropies, coherence and entanglement

Quantum resources that the battery capacity is compared against, and the
checker for the four qubit capacity relations (CSU, CTU, CLU, CCU).

Entropies use log base 2. Coherence is measured in the eigenbasis of the
supplied Hamiltonian; without one the computational basis is used.
"""

from dataclasses import asdict, dataclass
from typing import Optional, Sequence, Union

import numpy as np
from scipy.special import xlogy

from battery import QubitBatteryParams, capacity_gap
from qstate import (
    TOL_HERMITIAN,
    TOL_POSITIVE,
    TOL_TRACE,
    BatteryCapError,
    DensityMatrix,
    DimensionMismatch,
    NotHermitian,
    NotPositive,
    ObservableHamiltonian,
    TraceNotOne,
)

SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SPIN_FLIP = np.kron(SIGMA_Y, SIGMA_Y)

ANALYTIC_TOLERANCE = 1e-9
EXPERIMENT_TOLERANCE = 0.02


class InvalidOrder(BatteryCapError):
    pass


class UnsupportedDimension(BatteryCapError):
    pass


@dataclass(frozen=True)
class RelationReport:
    csu: float
    ctu: float
    clu: float
    ccu: float
    csu_holds: bool
    ctu_holds: bool
    clu_holds: bool
    ccu_holds: bool
    tolerance: float
    q: float = 2.0
    # capacity/E minus relative-entropy coherence; reported, not gating
    ccu_rel: float = 0.0

    @property
    def all_hold(self) -> bool:
        return self.csu_holds and self.ctu_holds and self.clu_holds and self.ccu_holds

    def violations(self) -> list[str]:
        names = []
        for name in ("csu", "ctu", "clu", "ccu"):
            if not getattr(self, f"{name}_holds"):
                names.append(name.upper())
        return names

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class EntanglementReport:
    capacity_gap: float
    concurrence: float
    eof: float
    geometric: float

    def to_dict(self) -> dict:
        return asdict(self)


def _entropy_terms(values: np.ndarray) -> float:
    positive = values[values > 0.0]
    return float(-np.sum(positive * np.log2(positive)))


def binary_entropy(t: float) -> float:
    """h(t) = -t log2 t - (1-t) log2 (1-t) with h(0) = h(1) = 0."""
    if t <= 0.0 or t >= 1.0:
        return 0.0
    return float(-t * np.log2(t) - (1 - t) * np.log2(1 - t))


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """S(rho) = -sum lambda log2 lambda, in bits."""
    return _entropy_terms(rho.eigenvalues())


def tsallis_entropy(rho: DensityMatrix, q: float) -> float:
    """T_q(rho) = (1 - Tr rho^q) / (q - 1), defined for q > 1."""
    if not q > 1.0:
        raise InvalidOrder(f"Tsallis order must exceed 1, got q = {q}")
    values = rho.eigenvalues()
    return float((1.0 - np.sum(values ** q)) / (q - 1.0))


def linear_entropy(rho: DensityMatrix) -> float:
    """L(rho) = 1 - Tr rho^2."""
    return tsallis_entropy(rho, 2.0)


def _in_energy_basis(rho: DensityMatrix, hamiltonian: Optional[ObservableHamiltonian]) -> np.ndarray:
    if hamiltonian is None:
        return rho.matrix
    if hamiltonian.dim != rho.dim:
        raise DimensionMismatch(f"State dimension {rho.dim} does not match Hamiltonian dimension {hamiltonian.dim}")
    v = hamiltonian.eigenbasis
    return v.conj().T @ rho.matrix @ v


def l1_coherence(rho: DensityMatrix, hamiltonian: Optional[ObservableHamiltonian] = None) -> float:
    """Sum of |off-diagonal| entries in the energy eigenbasis."""
    m = _in_energy_basis(rho, hamiltonian)
    return float(np.sum(np.abs(m)) - np.sum(np.abs(np.diag(m))))


def relative_entropy_coherence(rho: DensityMatrix, hamiltonian: Optional[ObservableHamiltonian] = None) -> float:
    """S(rho_diag) - S(rho), rho_diag the dephased state in the energy eigenbasis."""
    m = _in_energy_basis(rho, hamiltonian)
    dephased = np.clip(np.diag(m).real, 0.0, None)
    return max(_entropy_terms(dephased) - von_neumann_entropy(rho), 0.0)


def robustness_of_coherence_qubit(
    state: Union[QubitBatteryParams, DensityMatrix],
    hamiltonian: Optional[ObservableHamiltonian] = None,
) -> float:
    """
    Robustness of coherence for a qubit, equal to 2r (the l1 value).

    Raises:
        UnsupportedDimension: For states beyond two levels
    """
    if isinstance(state, QubitBatteryParams):
        state.to_density()
        return 2.0 * state.r
    if state.dim != 2:
        raise UnsupportedDimension(f"Robustness of coherence is only implemented for qubits, got d = {state.dim}")
    return l1_coherence(state, hamiltonian)


def concurrence(rho_ab: DensityMatrix) -> float:
    """Two-qubit concurrence from the spin-flipped spectrum, conjugation in the H/V basis."""
    if rho_ab.dim != 4:
        raise UnsupportedDimension(f"Concurrence needs a two-qubit state, got d = {rho_ab.dim}")
    m = rho_ab.matrix
    flipped = m @ SPIN_FLIP @ m.conj() @ SPIN_FLIP
    values = np.sort(np.clip(np.linalg.eigvals(flipped).real, 0.0, None))[::-1]
    roots = np.sqrt(values)
    return float(max(roots[0] - roots[1] - roots[2] - roots[3], 0.0))


def _concurrence_root(c: float) -> float:
    return float(np.sqrt(max(1.0 - min(c, 1.0) ** 2, 0.0)))


def eof_from_concurrence(c: float) -> float:
    return binary_entropy((1.0 + _concurrence_root(c)) / 2.0)


def geometric_from_concurrence(c: float) -> float:
    return (1.0 - _concurrence_root(c)) / 2.0


def entanglement_of_formation(rho_ab: DensityMatrix) -> float:
    return eof_from_concurrence(concurrence(rho_ab))


def geometric_measure(rho_ab: DensityMatrix) -> float:
    return geometric_from_concurrence(concurrence(rho_ab))


def entanglement_report(
    rho_ab: DensityMatrix,
    h_a: ObservableHamiltonian,
    h_b: ObservableHamiltonian,
) -> EntanglementReport:
    c = concurrence(rho_ab)
    return EntanglementReport(
        capacity_gap=capacity_gap(rho_ab, h_a, h_b),
        concurrence=c,
        eof=eof_from_concurrence(c),
        geometric=geometric_from_concurrence(c),
    )


@dataclass(frozen=True, eq=False)
class RelationSweep:
    """
    Relation sums for a stack of qubit states.

    Every array has one entry per state, except ctu which has one column
    per Tsallis order.
    """

    csu: np.ndarray
    ctu: np.ndarray
    clu: np.ndarray
    ccu: np.ndarray
    ccu_rel: np.ndarray
    orders: tuple
    tolerance: float

    def __len__(self) -> int:
        return self.csu.shape[0]

    @property
    def csu_holds(self) -> np.ndarray:
        return self.csu >= 1.0 - self.tolerance

    @property
    def ctu_holds(self) -> np.ndarray:
        return self.ctu <= 1.0 + self.tolerance

    @property
    def clu_holds(self) -> np.ndarray:
        return np.abs(self.clu - 1.0) <= self.tolerance

    @property
    def ccu_holds(self) -> np.ndarray:
        return self.ccu >= -self.tolerance

    @property
    def failed(self) -> np.ndarray:
        """Mask of states that break at least one relation at any order."""
        return ~(self.csu_holds & self.ctu_holds.all(axis=1) & self.clu_holds & self.ccu_holds)

    def violations(self, index: int) -> list[tuple[str, float]]:
        """(name, sum) of every relation state `index` breaks."""
        broken = []
        if not self.csu_holds[index]:
            broken.append(("CSU", float(self.csu[index])))
        for column, q in enumerate(self.orders):
            if not self.ctu_holds[index, column]:
                name = "CTU" if len(self.orders) == 1 else f"CTU(q={q:g})"
                broken.append((name, float(self.ctu[index, column])))
        if not self.clu_holds[index]:
            broken.append(("CLU", float(self.clu[index])))
        if not self.ccu_holds[index]:
            broken.append(("CCU", float(self.ccu[index])))
        return broken

    def report(self, index: int, column: int = 0) -> RelationReport:
        return RelationReport(
            csu=float(self.csu[index]),
            ctu=float(self.ctu[index, column]),
            clu=float(self.clu[index]),
            ccu=float(self.ccu[index]),
            csu_holds=bool(self.csu_holds[index]),
            ctu_holds=bool(self.ctu_holds[index, column]),
            clu_holds=bool(self.clu_holds[index]),
            ccu_holds=bool(self.ccu_holds[index]),
            tolerance=self.tolerance,
            q=float(self.orders[column]),
            ccu_rel=float(self.ccu_rel[index]),
        )


def _stacked_entropy(values: np.ndarray) -> np.ndarray:
    return -np.sum(xlogy(values, values), axis=-1) / np.log(2.0)


def check_relations_batch(
    matrices,
    hamiltonian: ObservableHamiltonian,
    orders: Sequence[float] = (2.0,),
    tolerance: float = ANALYTIC_TOLERANCE,
) -> RelationSweep:
    """
    Evaluate the four qubit capacity relations on a stack of states.

    The spectrum of each state is taken once and shared by the capacity,
    the entropies at every order and the coherence terms.

    Args:
        matrices: Array of shape (n, 2, 2), one density matrix per row
        hamiltonian: Qubit Hamiltonian shared by all states
        orders: Tsallis orders, each >= 2
        tolerance: Slack allowed on every relation

    Raises:
        UnsupportedDimension: If the states or the Hamiltonian are not qubits
        InvalidOrder: If any order is below 2
        NotHermitian, TraceNotOne, NotPositive: If a row is not a state
    """
    m = np.asarray(matrices, dtype=complex)
    if m.ndim != 3 or m.shape[1:] != (2, 2) or hamiltonian.dim != 2:
        raise UnsupportedDimension(
            f"Capacity relations hold for qubit batteries, got states {m.shape[1:]} and d = {hamiltonian.dim}"
        )
    orders = tuple(float(q) for q in orders)
    if not orders:
        raise InvalidOrder("At least one Tsallis order is needed")
    for q in orders:
        if q < 2.0:
            raise InvalidOrder(f"Capacity relations need q >= 2, got q = {q}")

    adjoint = np.conj(np.swapaxes(m, 1, 2))
    if m.shape[0] and np.max(np.abs(m - adjoint)) > TOL_HERMITIAN:
        raise NotHermitian("Stack holds a matrix that is not Hermitian")
    m = (m + adjoint) / 2
    traces = np.trace(m, axis1=1, axis2=2).real
    if np.any(np.abs(traces - 1.0) > TOL_TRACE):
        raise TraceNotOne("Stack holds a matrix whose trace is not 1")
    values = np.linalg.eigvalsh(m)
    if np.any(values[:, 0] < -TOL_POSITIVE):
        raise NotPositive("Stack holds a matrix with a negative eigenvalue")
    values = np.clip(values, 0.0, None)

    energies = hamiltonian.energies
    c = values @ (energies - energies[::-1]) / hamiltonian.unit_energy
    entropy = _stacked_entropy(values)
    tsallis = np.column_stack([(1.0 - np.sum(values ** q, axis=1)) / (q - 1.0) for q in orders])
    linear = 1.0 - np.sum(values ** 2, axis=1)

    v = hamiltonian.eigenbasis
    in_basis = v.conj().T @ m @ v
    populations = np.clip(np.diagonal(in_basis, axis1=1, axis2=2).real, 0.0, None)
    l1 = np.abs(in_basis).sum(axis=(1, 2)) - np.abs(np.diagonal(in_basis, axis1=1, axis2=2)).sum(axis=1)
    rel = np.maximum(_stacked_entropy(populations) - entropy, 0.0)

    return RelationSweep(
        csu=c + entropy,
        ctu=c[:, np.newaxis] + tsallis,
        clu=c ** 2 + 2.0 * linear,
        ccu=c - l1,
        ccu_rel=c - rel,
        orders=orders,
        tolerance=tolerance,
    )


def check_relations(
    rho: DensityMatrix,
    hamiltonian: ObservableHamiltonian,
    q: float = 2.0,
    tolerance: float = ANALYTIC_TOLERANCE,
) -> RelationReport:
    """
    Evaluate the four qubit capacity relations.

    CSU = C/E + S >= 1, CTU = C/E + T_q <= 1, CLU = C^2/E^2 + 2L = 1,
    CCU = C/E - Cohe_l1 >= 0, each at the given tolerance.

    Raises:
        UnsupportedDimension: If the battery is not a qubit
        InvalidOrder: If q < 2
    """
    if rho.dim != 2 or hamiltonian.dim != 2:
        raise UnsupportedDimension(f"Capacity relations hold for qubit batteries, got d = {rho.dim}")
    return check_relations_batch(rho.matrix[np.newaxis], hamiltonian, (q,), tolerance).report(0)
