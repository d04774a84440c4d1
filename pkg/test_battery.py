"""Tests for ergotropy, antiergotropy, capacity and the unitary-orbit oracle."""

import math
import time

import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

from battery import (
    InvalidParams,
    QubitBatteryParams,
    active_energy,
    active_state,
    antiergotropy,
    brute_force_work_extrema,
    capacity,
    capacity_gap,
    ergotropy,
    passive_energy,
    passive_state,
    permutation_unitaries,
    polarization_hamiltonian,
    qubit_antiergotropy,
    qubit_capacity_closed_form,
    qubit_ergotropy,
)
from photonics import prepare_phi
from qstate import (
    DimensionMismatch,
    ObservableHamiltonian,
    apply_unitary,
    composite_hamiltonian,
    expectation,
    ket_to_density,
    partial_trace,
    qubit_state,
    random_density,
    random_unitary,
    tensor,
    validate_density,
)


def test_polarization_hamiltonian_excites_horizontal():
    h = polarization_hamiltonian(2.0)
    assert np.allclose(h.matrix, np.diag([2.0, 0.0]))
    assert np.allclose(h.energies, [0.0, 2.0])


def test_excited_state_has_full_ergotropy(photon_h):
    rho = ket_to_density([1, 0])
    quantities = capacity(rho, photon_h)
    assert quantities.ergotropy == pytest.approx(1.0)
    assert quantities.antiergotropy == pytest.approx(0.0, abs=1e-12)
    assert quantities.capacity == pytest.approx(1.0)


def test_ground_state_has_full_antiergotropy(photon_h):
    rho = ket_to_density([0, 1])
    assert ergotropy(rho, photon_h) == pytest.approx(0.0, abs=1e-12)
    assert antiergotropy(rho, photon_h) == pytest.approx(1.0)


def test_maximally_mixed_state_has_no_capacity():
    h = ObservableHamiltonian.from_levels([0.0, 0.3, 1.7], 2.0)
    mixed = validate_density(np.eye(3) / 3)
    assert capacity(mixed, h).capacity == pytest.approx(0.0, abs=1e-12)


def test_passive_and_active_states_are_diagonal_in_energy_basis(qubit_h):
    rho = qubit_state(0.7, 0.2)
    passive = passive_state(rho, qubit_h)
    active = active_state(rho, qubit_h)
    low, high = sorted(rho.eigenvalues())
    assert np.allclose(passive.matrix, np.diag([high, low]))
    assert np.allclose(active.matrix, np.diag([low, high]))
    assert expectation(passive, qubit_h) == pytest.approx(passive_energy(rho, qubit_h))
    assert expectation(active, qubit_h) == pytest.approx(active_energy(rho, qubit_h))


def test_capacity_depends_only_on_spectrum(rng):
    h = ObservableHamiltonian.from_levels([0.0, 1.0, 3.0])
    rho = random_density(3, rng)
    u = random_unitary(3, rng)
    rotated = apply_unitary(rho, u)
    assert capacity(rotated, h).capacity == pytest.approx(capacity(rho, h).capacity, abs=1e-10)


def test_dimension_mismatch_raises(photon_h):
    with pytest.raises(DimensionMismatch):
        capacity(random_density(3, np.random.default_rng(1)), photon_h)


def test_invalid_qubit_params():
    with pytest.raises(InvalidParams):
        QubitBatteryParams(0.5, 0.6).to_density()
    with pytest.raises(InvalidParams):
        qubit_capacity_closed_form(QubitBatteryParams(1.2, 0.0))
    ok, message = QubitBatteryParams(0.1, -0.1).validate()
    assert not ok
    assert "negative" in message


@seed(3)
@settings(max_examples=100, deadline=None)
@given(
    p=st.floats(0.0, 1.0),
    fraction=st.floats(0.0, 1.0),
    phase=st.floats(0.0, 2 * math.pi),
    unit_energy=st.floats(0.1, 10.0),
)
def test_qubit_closed_forms_match_rearrangement(p, fraction, phase, unit_energy):
    params = QubitBatteryParams(p, fraction * math.sqrt(p * (1 - p)), phase)
    rho = params.to_density()
    h = ObservableHamiltonian.from_levels([0.0, 1.0], unit_energy)
    quantities = capacity(rho, h)

    assert quantities.capacity == pytest.approx(qubit_capacity_closed_form(params, unit_energy), abs=1e-9)
    assert quantities.ergotropy == pytest.approx(qubit_ergotropy(params, unit_energy), abs=1e-9)
    assert quantities.antiergotropy == pytest.approx(qubit_antiergotropy(params, unit_energy), abs=1e-9)
    assert quantities.capacity == pytest.approx(quantities.active_energy - quantities.passive_energy, abs=1e-12)


@pytest.mark.parametrize("theta, expected", [(0.0, 0.0), (30.0, 1.0), (45.0, 2.0), (60.0, 1.0), (90.0, 0.0)])
def test_capacity_gap_of_pure_source_states(photon_h, theta, expected):
    rho = prepare_phi(theta)
    assert capacity_gap(rho, photon_h, photon_h) == pytest.approx(expected, abs=1e-9)


def test_capacity_gap_of_product_state_is_zero(photon_h):
    rho = tensor(qubit_state(0.2, 0.3), qubit_state(0.6, 0.1, 2.0))
    assert capacity_gap(rho, photon_h, photon_h) == pytest.approx(0.0, abs=1e-9)


def test_capacity_gap_rejects_non_qubit_hamiltonian(bell):
    h3 = ObservableHamiltonian.from_levels([0.0, 1.0, 2.0])
    with pytest.raises(DimensionMismatch):
        capacity_gap(bell, h3, h3)


def test_permutation_unitaries_count():
    h = ObservableHamiltonian.from_levels([0.0, 1.0, 2.0])
    rho = random_density(3, np.random.default_rng(5))
    unitaries = permutation_unitaries(rho, h)
    assert len(unitaries) == 6
    for u in unitaries:
        assert np.allclose(u.conj().T @ u, np.eye(3), atol=1e-10)


def test_brute_force_requires_samples(qubit_h):
    with pytest.raises(InvalidParams):
        brute_force_work_extrema(qubit_state(0.5, 0.0), qubit_h, 0)


@pytest.mark.parametrize("dim", [2, 3, 4])
def test_brute_force_never_beats_rearrangement(dim):
    rng = np.random.default_rng(100 + dim)
    for trial in range(25):
        rho = random_density(dim, rng)
        levels = np.sort(rng.uniform(0.0, 3.0, dim))
        h = ObservableHamiltonian.from_levels(levels, 1.0, random_unitary(dim, rng))
        low, high = brute_force_work_extrema(rho, h, n_samples=200, seed=trial)

        assert low >= passive_energy(rho, h) - 1e-9
        assert high <= active_energy(rho, h) + 1e-9
        # the permutation members attain the extremes
        assert low == pytest.approx(passive_energy(rho, h), abs=1e-9)
        assert high == pytest.approx(active_energy(rho, h), abs=1e-9)


def test_ergotropy_of_15_degree_photon(photon_h):
    rho_a = partial_trace(prepare_phi(15.0), "A")
    assert ergotropy(rho_a, photon_h) == pytest.approx(0.8660, abs=1e-4)
    assert antiergotropy(rho_a, photon_h) == pytest.approx(0.0, abs=1e-4)


def test_brute_force_extrema_examples(photon_h):
    mixed = validate_density(np.eye(2) / 2)
    low, high = brute_force_work_extrema(mixed, photon_h, n_samples=100, seed=1)
    assert low == pytest.approx(0.5)
    assert high == pytest.approx(0.5)

    h_ab = composite_hamiltonian(photon_h, photon_h)
    low, high = brute_force_work_extrema(prepare_phi(45.0), h_ab, n_samples=50, seed=2)
    assert low == pytest.approx(0.0, abs=1e-9)
    assert high == pytest.approx(2.0, abs=1e-9)


def test_degenerate_levels_do_not_change_extreme_energies(rng):
    levels = [0.0, 1.0, 1.0, 2.0]
    swapped = ObservableHamiltonian.from_levels(levels, 1.0, np.eye(4)[:, [0, 2, 1, 3]])
    plain = ObservableHamiltonian.from_levels(levels, 1.0)
    rho = random_density(4, rng)
    assert passive_energy(rho, swapped) == pytest.approx(passive_energy(rho, plain), abs=1e-10)
    assert active_energy(rho, swapped) == pytest.approx(active_energy(rho, plain), abs=1e-10)


def test_brute_force_single_sample(qubit_h):
    rho = qubit_state(0.3, 0.2)
    low, high = brute_force_work_extrema(rho, qubit_h, n_samples=1, seed=0)
    assert low == pytest.approx(passive_energy(rho, qubit_h), abs=1e-12)
    assert high == pytest.approx(active_energy(rho, qubit_h), abs=1e-12)


def test_brute_force_sweep_fits_time_budget():
    # 120 s for 1000 instances of 10^4 samples, run here on a twentieth of the instances
    instances = 50
    rng = np.random.default_rng(2024)
    h = ObservableHamiltonian.from_levels([0.0, 0.5, 1.2, 2.0], 1.0)
    started = time.perf_counter()
    for trial in range(instances):
        rho = random_density(4, rng)
        low, high = brute_force_work_extrema(rho, h, n_samples=10_000, seed=trial)
        assert passive_energy(rho, h) - 1e-9 <= low <= high <= active_energy(rho, h) + 1e-9
    assert time.perf_counter() - started < 120.0 * instances / 1000


def test_capacity_of_60_degree_photon_is_positive(photon_h):
    rho_a = partial_trace(prepare_phi(60.0), "A")
    assert capacity(rho_a, photon_h).capacity == pytest.approx(0.5, abs=1e-12)
    assert capacity(partial_trace(prepare_phi(60.0), "A"), polarization_hamiltonian(2.0)).capacity == pytest.approx(1.0)
