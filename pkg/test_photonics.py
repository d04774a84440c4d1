"""Tests for the two-photon source simulator."""

import numpy as np
import pytest

from photonics import (
    BASES,
    NOISE_MODELS,
    TOMOGRAPHY_SETTINGS,
    CountRecord,
    EmptyRecord,
    InvalidSourceConfig,
    InvalidStrength,
    MeasurementSetting,
    SourceConfig,
    apply_noise,
    joint_probability,
    list_noise_models,
    marginal_probability,
    outcome_probabilities,
    prepare_phi,
    projectors,
    records_from_json,
    records_to_json,
    simulate_counts,
)
from qstate import fidelity, ket_to_density, random_density

HV_HV = MeasurementSetting("HV", "HV")


def test_prepare_phi_examples():
    assert np.allclose(prepare_phi(0.0).matrix, np.diag([0, 1, 0, 0]))
    assert np.allclose(np.diag(prepare_phi(30.0).matrix).real, [0.0, 0.75, 0.25, 0.0])
    assert prepare_phi(45.0).matrix[1, 2] == pytest.approx(0.5)


def test_prepare_phi_rejects_out_of_range_angle():
    with pytest.raises(InvalidSourceConfig):
        prepare_phi(91.0)


def test_noise_models_registry():
    assert list_noise_models() == ["none", "white", "dephasing"]
    assert set(NOISE_MODELS) == {"none", "white", "dephasing"}


def test_apply_noise_limits(bell):
    assert apply_noise(bell, "white", 0.0) is bell
    assert np.allclose(apply_noise(bell, "white", 1.0).matrix, np.eye(4) / 4)
    assert apply_noise(bell, "none", 0.7).matrix[1, 2] == pytest.approx(0.5)


def test_apply_noise_white_fidelity(bell, noisy_bell):
    assert fidelity(noisy_bell, bell) == pytest.approx(0.985, abs=1e-3)


def test_dephasing_scales_off_diagonals_only(bell):
    dephased = apply_noise(bell, "dephasing", 0.4)
    assert np.allclose(np.diag(dephased.matrix), np.diag(bell.matrix))
    assert dephased.matrix[1, 2] == pytest.approx(0.3)
    assert np.trace(dephased.matrix).real == pytest.approx(1.0)


def test_apply_noise_errors(bell):
    with pytest.raises(InvalidStrength):
        apply_noise(bell, "white", 1.5)
    with pytest.raises(InvalidSourceConfig):
        apply_noise(bell, "pink", 0.1)


def test_source_config_validation():
    assert SourceConfig(30.0).validate() == (True, None)
    assert not SourceConfig(120.0).validate()[0]
    assert not SourceConfig(30.0, noise_strength=-0.1).validate()[0]
    assert not SourceConfig(30.0, mean_counts_per_setting=0).validate()[0]
    assert not SourceConfig(30.0, noise_model="pink").validate()[0]
    with pytest.raises(InvalidSourceConfig):
        SourceConfig(30.0, noise_model="pink").prepare()


def test_unknown_basis_rejected():
    with pytest.raises(InvalidSourceConfig):
        MeasurementSetting("HV", "XY")


def test_tomography_set_has_nine_settings():
    assert len(TOMOGRAPHY_SETTINGS) == 9
    assert len({setting.label for setting in TOMOGRAPHY_SETTINGS}) == 9


@pytest.mark.parametrize("basis", list(BASES))
def test_single_photon_bases_are_complete(basis):
    first, second = BASES[basis]
    total = np.outer(first, first.conj()) + np.outer(second, second.conj())
    assert np.allclose(total, np.eye(2))


def test_projector_pairs_are_complete():
    for setting in TOMOGRAPHY_SETTINGS:
        total = sum(proj for _, proj in projectors(setting))
        assert np.allclose(total, np.eye(4), atol=1e-12)


def test_hv_projectors_are_computational_basis():
    for index, (_, proj) in enumerate(projectors(HV_HV)):
        expected = np.zeros((4, 4))
        expected[index, index] = 1.0
        assert np.allclose(proj, expected)


def test_bases_are_mutually_unbiased():
    horizontal = BASES["HV"][0]
    left = BASES["LR"][0]
    diagonal = BASES["DA"][0]
    assert abs(np.vdot(left, horizontal)) ** 2 == pytest.approx(0.5)
    assert abs(np.vdot(diagonal, horizontal)) ** 2 == pytest.approx(0.5)
    assert abs(np.vdot(left, diagonal)) ** 2 == pytest.approx(0.5)


def test_outcome_probabilities_sum_to_one(rng):
    rho = random_density(4, rng)
    for setting in TOMOGRAPHY_SETTINGS:
        assert outcome_probabilities(rho, setting).sum() == pytest.approx(1.0, abs=1e-12)


def test_simulate_counts_zero_probability_outcomes():
    rho = ket_to_density([0, 1, 0, 0])
    (record,) = simulate_counts(rho, [HV_HV], 1000, seed=1)
    assert record.counts[0] == 0
    assert record.counts[2] == 0
    assert record.counts[3] == 0
    assert abs(record.counts[1] - 1000) < 5 * np.sqrt(1000)


def test_simulate_counts_bell_marginal(bell):
    (record,) = simulate_counts(bell, [HV_HV], 1e4, seed=3)
    assert record.counts[1] / record.total == pytest.approx(0.5, abs=0.02)


def test_simulate_counts_is_deterministic(noisy_bell):
    first = simulate_counts(noisy_bell, TOMOGRAPHY_SETTINGS, 1e4, seed=42)
    second = simulate_counts(noisy_bell, TOMOGRAPHY_SETTINGS, 1e4, seed=42)
    other = simulate_counts(noisy_bell, TOMOGRAPHY_SETTINGS, 1e4, seed=43)
    assert [r.counts for r in first] == [r.counts for r in second]
    assert [r.counts for r in first] != [r.counts for r in other]


def test_setting_streams_do_not_depend_on_the_other_settings(noisy_bell):
    full = simulate_counts(noisy_bell, TOMOGRAPHY_SETTINGS, 1e4, seed=5)
    prefix = simulate_counts(noisy_bell, TOMOGRAPHY_SETTINGS[:3], 1e4, seed=5)
    assert [r.counts for r in full[:3]] == [r.counts for r in prefix]


def test_simulate_counts_requires_positive_mean(bell):
    with pytest.raises(InvalidSourceConfig):
        simulate_counts(bell, [HV_HV], 0, seed=0)


def test_frequencies_converge_at_high_counts(noisy_bell):
    total = 1e6
    records = simulate_counts(noisy_bell, TOMOGRAPHY_SETTINGS, total, seed=2024)
    for record in records:
        expected = outcome_probabilities(noisy_bell, record.setting)
        observed = joint_probability(record)
        assert np.all(np.abs(observed - expected) <= 4 * np.sqrt(expected / total) + 1e-9)


def test_joint_probability_examples():
    assert np.allclose(joint_probability(CountRecord(HV_HV, (50, 50, 0, 0))), [0.5, 0.5, 0.0, 0.0])
    assert np.allclose(joint_probability(CountRecord(HV_HV, (1, 1, 1, 1))), [0.25] * 4)
    assert joint_probability(CountRecord(HV_HV, (1, 1, 1, 0))).sum() == pytest.approx(1.0)


def test_joint_probability_of_15_degree_source():
    rho = prepare_phi(15.0)
    (record,) = simulate_counts(rho, [HV_HV], 1e4, seed=9)
    expected = [0.0, np.cos(np.radians(15)) ** 2, np.sin(np.radians(15)) ** 2, 0.0]
    assert np.allclose(joint_probability(record), expected, atol=0.02)


def test_joint_probability_of_empty_record():
    with pytest.raises(EmptyRecord):
        joint_probability(CountRecord(HV_HV, (0, 0, 0, 0)))


def test_marginal_probability_sums_to_one(noisy_bell):
    records = simulate_counts(noisy_bell, TOMOGRAPHY_SETTINGS, 1e4, seed=8)
    for party in ("A", "B"):
        for _, marginal in marginal_probability(records, party):
            assert marginal.sum() == pytest.approx(1.0)
            assert marginal == pytest.approx([0.5, 0.5], abs=0.03)


def test_marginal_of_product_record():
    record = CountRecord(HV_HV, (30, 10, 40, 20))
    [(_, marginal_a)] = marginal_probability([record], "A")
    [(_, marginal_b)] = marginal_probability([record], "B")
    assert marginal_a == pytest.approx([0.4, 0.6])
    assert marginal_b == pytest.approx([0.7, 0.3])
    with pytest.raises(InvalidSourceConfig):
        marginal_probability([], "C")


def test_count_record_validation():
    with pytest.raises(InvalidSourceConfig):
        CountRecord(HV_HV, (1, 2, 3))
    with pytest.raises(InvalidSourceConfig):
        CountRecord(HV_HV, (1, -2, 3, 4))
    with pytest.raises(InvalidSourceConfig):
        CountRecord.from_dict({"basis_A": "HV", "counts": [1, 2, 3, 4]})


def test_records_json_interchange_format(noisy_bell):
    records = simulate_counts(noisy_bell, TOMOGRAPHY_SETTINGS[:2], 100, seed=0)
    text = records_to_json(records)
    assert '"basis_A": "HV"' in text
    assert [r.counts for r in records_from_json(text)] == [r.counts for r in records]
    with pytest.raises(InvalidSourceConfig):
        records_from_json('{"counts": []}')
