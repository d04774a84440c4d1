"""Tests for entropies, coherence, entanglement and the capacity relations."""

import math

import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

from battery import QubitBatteryParams, qubit_capacity_closed_form
from photonics import apply_noise, prepare_phi
from qstate import (
    NotPositive,
    ObservableHamiltonian,
    apply_unitary,
    ket_to_density,
    qubit_matrices,
    qubit_state,
    random_unitary,
    tensor,
    validate_density,
)
from resources import (
    InvalidOrder,
    UnsupportedDimension,
    binary_entropy,
    check_relations,
    check_relations_batch,
    concurrence,
    entanglement_of_formation,
    entanglement_report,
    geometric_measure,
    l1_coherence,
    linear_entropy,
    relative_entropy_coherence,
    robustness_of_coherence_qubit,
    tsallis_entropy,
    von_neumann_entropy,
)

PLUS = ket_to_density([1, 1])


def test_binary_entropy_endpoints_and_midpoint():
    assert binary_entropy(0.0) == 0.0
    assert binary_entropy(1.0) == 0.0
    assert binary_entropy(0.5) == pytest.approx(1.0)
    assert binary_entropy(0.75) == pytest.approx(0.8112781244591328)


def test_entropies_of_pure_and_mixed_qubits():
    mixed = validate_density(np.eye(2) / 2)
    assert von_neumann_entropy(PLUS) == pytest.approx(0.0, abs=1e-12)
    assert von_neumann_entropy(mixed) == pytest.approx(1.0)
    assert linear_entropy(mixed) == pytest.approx(0.5)
    assert tsallis_entropy(mixed, 3.0) == pytest.approx(0.375)


def test_tsallis_order_must_exceed_one():
    with pytest.raises(InvalidOrder):
        tsallis_entropy(PLUS, 1.0)


def test_coherence_of_plus_state():
    assert l1_coherence(PLUS) == pytest.approx(1.0)
    assert relative_entropy_coherence(PLUS) == pytest.approx(1.0)


def test_coherence_is_basis_dependent():
    # |+> is an eigenstate of a sigma_x Hamiltonian
    h = ObservableHamiltonian.from_matrix(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert l1_coherence(PLUS, h) == pytest.approx(0.0, abs=1e-12)
    assert relative_entropy_coherence(PLUS, h) == pytest.approx(0.0, abs=1e-9)


def test_robustness_of_coherence_qubit():
    assert robustness_of_coherence_qubit(QubitBatteryParams(0.5, 0.3)) == pytest.approx(0.6)
    assert robustness_of_coherence_qubit(qubit_state(0.5, 0.3, 1.2)) == pytest.approx(0.6)
    with pytest.raises(UnsupportedDimension):
        robustness_of_coherence_qubit(validate_density(np.eye(3) / 3))


@pytest.mark.parametrize(
    "theta, c, eof, gm",
    [
        (30.0, 0.8660254037844386, 0.8112781244591328, 0.25),
        (45.0, 1.0, 1.0, 0.5),
        (0.0, 0.0, 0.0, 0.0),
    ],
)
def test_entanglement_of_source_states(theta, c, eof, gm):
    rho = prepare_phi(theta)
    assert concurrence(rho) == pytest.approx(c, abs=1e-6)
    assert entanglement_of_formation(rho) == pytest.approx(eof, abs=1e-6)
    assert geometric_measure(rho) == pytest.approx(gm, abs=1e-6)


def test_product_state_is_not_entangled():
    rho = tensor(qubit_state(0.3, 0.2), qubit_state(0.5, 0.5))
    assert concurrence(rho) == pytest.approx(0.0, abs=1e-7)


def test_white_noise_lowers_concurrence(bell):
    # Werner state with weight w = 1 - s: C = max(0, (3w - 1) / 2)
    noisy = apply_noise(bell, "white", 0.2)
    assert concurrence(noisy) == pytest.approx(0.7, abs=1e-9)


def test_concurrence_needs_two_qubits():
    with pytest.raises(UnsupportedDimension):
        concurrence(PLUS)


def test_entanglement_report_at_30_degrees(photon_h):
    report = entanglement_report(prepare_phi(30.0), photon_h, photon_h)
    assert report.capacity_gap == pytest.approx(1.0, abs=1e-6)
    assert report.concurrence == pytest.approx(math.sin(math.radians(60.0)), abs=1e-6)
    assert set(report.to_dict()) == {"capacity_gap", "concurrence", "eof", "geometric"}


def test_relations_saturate_for_maximally_mixed_qubit(qubit_h):
    report = check_relations(validate_density(np.eye(2) / 2), qubit_h)
    assert report.csu == pytest.approx(1.0, abs=1e-9)
    assert report.ctu == pytest.approx(0.5, abs=1e-9)
    assert report.clu == pytest.approx(1.0, abs=1e-9)
    assert report.all_hold
    assert report.violations() == []


def test_relations_reject_bad_inputs(qubit_h, bell):
    with pytest.raises(InvalidOrder):
        check_relations(PLUS, qubit_h, q=1.5)
    with pytest.raises(UnsupportedDimension):
        check_relations(bell, ObservableHamiltonian.from_levels([0.0, 1.0, 1.0, 2.0]))


def test_impossible_tolerance_flags_every_relation(qubit_h):
    report = check_relations(qubit_state(0.3, 0.1), qubit_h, tolerance=-1.0)
    assert not report.all_hold
    assert report.violations() == ["CSU", "CTU", "CLU", "CCU"]


@seed(17)
@settings(max_examples=200, deadline=None)
@given(
    p=st.floats(0.0, 1.0),
    fraction=st.floats(0.0, 1.0),
    phase=st.floats(0.0, 2 * math.pi),
    q=st.sampled_from([2.0, 2.5, 3.0, 5.0]),
)
def test_capacity_relations_hold_for_random_qubits(p, fraction, phase, q):
    params = QubitBatteryParams(p, fraction * math.sqrt(p * (1 - p)), phase)
    h = ObservableHamiltonian.from_levels([0.0, 1.0], 1.0)
    report = check_relations(params.to_density(), h, q=q)
    assert report.all_hold, report.to_dict()
    assert report.ccu == pytest.approx(
        math.sqrt((2 * p - 1) ** 2 + 4 * params.r ** 2) - 2 * params.r, abs=1e-9
    )


def test_relations_use_unit_energy():
    h = ObservableHamiltonian.from_levels([0.0, 1.0], 4.0)
    report = check_relations(qubit_state(0.9, 0.0), h)
    assert report.csu == pytest.approx(0.8 + binary_entropy(0.9), abs=1e-9)


def test_entropy_examples():
    # (1 - 0.75^3 - 0.25^3) / 2
    assert tsallis_entropy(validate_density(np.diag([0.75, 0.25])), 3.0) == pytest.approx(0.28125, abs=1e-12)
    assert linear_entropy(validate_density(np.diag([0.9, 0.1]))) == pytest.approx(0.18)
    assert relative_entropy_coherence(qubit_state(0.5, 0.25)) == pytest.approx(0.1887, abs=1e-4)


def test_relations_of_excited_qubit(qubit_h):
    report = check_relations(ket_to_density([0, 1]), qubit_h)
    assert (report.csu, report.ctu, report.clu, report.ccu) == pytest.approx((1.0, 1.0, 1.0, 1.0), abs=1e-9)
    assert report.all_hold


def test_concurrence_is_invariant_under_local_unitaries(rng, noisy_bell):
    local = np.kron(random_unitary(2, rng), random_unitary(2, rng))
    assert concurrence(apply_unitary(noisy_bell, local)) == pytest.approx(concurrence(noisy_bell), abs=1e-9)


def test_batch_relations_match_single_state_checks(qubit_h):
    rng = np.random.default_rng(8)
    p = rng.uniform(0.0, 1.0, size=40)
    r = rng.uniform(0.0, np.sqrt(p * (1 - p)))
    phase = rng.uniform(0.0, 2 * math.pi, size=40)
    orders = (2.0, 3.0)
    sweep = check_relations_batch(qubit_matrices(p, r, phase), qubit_h, orders)
    assert len(sweep) == 40
    assert not sweep.failed.any()
    for index in range(40):
        rho = qubit_state(p[index], r[index], phase[index])
        for column, q in enumerate(orders):
            single = check_relations(rho, qubit_h, q=q)
            batched = sweep.report(index, column)
            assert batched.ctu == pytest.approx(single.ctu, abs=1e-12)
            assert (batched.csu, batched.clu, batched.ccu) == pytest.approx((single.csu, single.clu, single.ccu), abs=1e-12)
            c = single.csu - von_neumann_entropy(rho)
            assert c == pytest.approx(qubit_capacity_closed_form(QubitBatteryParams(p[index], r[index])), abs=1e-9)
            assert batched.ccu_rel == pytest.approx(c - relative_entropy_coherence(rho, qubit_h), abs=1e-9)


def test_batch_relations_name_broken_orders(qubit_h):
    sweep = check_relations_batch(qubit_matrices([0.3], [0.1]), qubit_h, (2.0, 5.0), tolerance=-1.0)
    assert sweep.failed.tolist() == [True]
    assert [name for name, _ in sweep.violations(0)] == ["CSU", "CTU(q=2)", "CTU(q=5)", "CLU", "CCU"]


def test_batch_relations_reject_bad_input(qubit_h):
    with pytest.raises(InvalidOrder):
        check_relations_batch(qubit_matrices([0.5], [0.0]), qubit_h, (2.0, 1.5))
    with pytest.raises(NotPositive):
        check_relations_batch(qubit_matrices([0.5], [0.9]), qubit_h)
    with pytest.raises(UnsupportedDimension):
        check_relations_batch(np.eye(4)[np.newaxis] / 4, qubit_h)
