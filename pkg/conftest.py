"""Shared fixtures for the BatteryCap test suite."""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add current directory to path
sys.path.insert(0, str(Path(__file__).parent))

from battery import polarization_hamiltonian  # noqa: E402
from photonics import CountRecord, apply_noise, outcome_probabilities, prepare_phi  # noqa: E402
from qstate import ObservableHamiltonian  # noqa: E402

THETAS = (15.0, 30.0, 45.0, 60.0)


def exact_records(rho, settings, total):
    """Counts equal to total * probability, rounded; no sampling."""
    return [
        CountRecord(setting, tuple(int(round(total * p)) for p in outcome_probabilities(rho, setting)))
        for setting in settings
    ]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def photon_h():
    return polarization_hamiltonian(1.0)


@pytest.fixture
def qubit_h():
    """Levels (0, 1) on |0>, |1>: the convention of QubitBatteryParams."""
    return ObservableHamiltonian.from_levels([0.0, 1.0], 1.0)


@pytest.fixture
def bell():
    return prepare_phi(45.0)


@pytest.fixture
def noisy_bell(bell):
    return apply_noise(bell, "white", 0.02)
