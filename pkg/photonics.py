"""
BatteryCap - Two-photon source simulator

Prepares the polarization-entangled pair
|Phi(theta)> = cos(theta)|H>|V> + sin(theta)|V>|H>, degrades it with a noise
model, and draws Poissonian coincidence counts for local projective
measurements in the H/V, D/A and L/R bases.

Counts use the interchange format
[{"basis_A": "HV", "basis_B": "DA", "counts": [n00, n01, n10, n11]}, ...].
"""

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence, Union

import numpy as np

from qstate import BatteryCapError, DensityMatrix, ket_to_density, validate_density


class InvalidStrength(BatteryCapError):
    pass


class InvalidSourceConfig(BatteryCapError):
    pass


class EmptyRecord(BatteryCapError):
    pass


_SQRT_HALF = 1 / np.sqrt(2)

# Outcome 0 is the first vector of each basis
BASES = {
    "HV": (np.array([1, 0], dtype=complex), np.array([0, 1], dtype=complex)),
    "DA": (_SQRT_HALF * np.array([1, 1], dtype=complex), _SQRT_HALF * np.array([1, -1], dtype=complex)),
    "LR": (_SQRT_HALF * np.array([1, 1j], dtype=complex), _SQRT_HALF * np.array([1, -1j], dtype=complex)),
}

OUTCOMES = ((0, 0), (0, 1), (1, 0), (1, 1))


@dataclass(frozen=True)
class MeasurementSetting:
    basis_A: str
    basis_B: str

    def __post_init__(self):
        for basis in (self.basis_A, self.basis_B):
            if basis not in BASES:
                raise InvalidSourceConfig(f"Unknown basis '{basis}'. Available: {', '.join(BASES)}")

    @property
    def label(self) -> str:
        return f"{self.basis_A}-{self.basis_B}"


TOMOGRAPHY_SETTINGS = tuple(MeasurementSetting(a, b) for a, b in itertools.product(BASES, BASES))


@dataclass(frozen=True)
class CountRecord:
    setting: MeasurementSetting
    counts: tuple[int, int, int, int]

    def __post_init__(self):
        counts = tuple(int(n) for n in self.counts)
        if len(counts) != 4:
            raise InvalidSourceConfig(f"Expected 4 outcome counts, got {len(counts)}")
        if any(n < 0 for n in counts):
            raise InvalidSourceConfig(f"Counts must be non-negative, got {counts}")
        object.__setattr__(self, "counts", counts)

    @property
    def total(self) -> int:
        return sum(self.counts)

    def to_dict(self) -> dict:
        return {
            "basis_A": self.setting.basis_A,
            "basis_B": self.setting.basis_B,
            "counts": list(self.counts),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CountRecord":
        try:
            setting = MeasurementSetting(data["basis_A"], data["basis_B"])
            return cls(setting, tuple(data["counts"]))
        except (KeyError, TypeError) as e:
            raise InvalidSourceConfig(f"Malformed count record {data!r}: {e}")


@dataclass(frozen=True)
class SourceConfig:
    """
    Source and detection settings for one prepared state.

    Attributes:
        theta: Preparation angle in degrees, within [0, 90]
        noise_model: One of NOISE_MODELS
        noise_strength: s in [0, 1]
        mean_counts_per_setting: Expected total coincidences per setting
        seed: Base seed of the counting streams
    """

    theta: float
    noise_model: str = "white"
    noise_strength: float = 0.02
    mean_counts_per_setting: float = 1e4
    seed: int = 0

    def validate(self) -> tuple[bool, Optional[str]]:
        if not 0.0 <= self.theta <= 90.0:
            return False, f"theta = {self.theta} deg outside [0, 90]"
        if self.noise_model not in NOISE_MODELS:
            return False, f"Unknown noise model '{self.noise_model}'. Available: {', '.join(list_noise_models())}"
        if not 0.0 <= self.noise_strength <= 1.0:
            return False, f"noise_strength = {self.noise_strength} outside [0, 1]"
        if not self.mean_counts_per_setting > 0:
            return False, f"mean_counts_per_setting must be positive, got {self.mean_counts_per_setting}"
        if not 0 <= self.seed < 2 ** 64:
            return False, f"seed must be a 64-bit unsigned integer, got {self.seed}"
        return True, None

    def prepare(self) -> DensityMatrix:
        """The noisy source state."""
        is_valid, error = self.validate()
        if not is_valid:
            raise InvalidSourceConfig(error)
        return apply_noise(prepare_phi(self.theta), self.noise_model, self.noise_strength)


def prepare_phi(theta: float) -> DensityMatrix:
    """cos(theta)|HV> + sin(theta)|VH> as a density matrix; theta in degrees."""
    if not 0.0 <= theta <= 90.0:
        raise InvalidSourceConfig(f"theta = {theta} deg outside [0, 90]")
    t = np.deg2rad(theta)
    psi = np.array([0.0, np.cos(t), np.sin(t), 0.0], dtype=complex)
    return ket_to_density(psi)


def _no_noise(rho: DensityMatrix, strength: float) -> np.ndarray:
    return rho.matrix


def _white_noise(rho: DensityMatrix, strength: float) -> np.ndarray:
    return (1 - strength) * rho.matrix + strength * np.eye(rho.dim) / rho.dim


def _dephasing_noise(rho: DensityMatrix, strength: float) -> np.ndarray:
    m = rho.matrix * (1 - strength)
    np.fill_diagonal(m, np.diag(rho.matrix))
    return m


# Registry of available noise models
NOISE_MODELS: dict[str, Callable[[DensityMatrix, float], np.ndarray]] = {
    "none": _no_noise,
    "white": _white_noise,
    "dephasing": _dephasing_noise,
}


def list_noise_models() -> list:
    """Return list of available noise model names."""
    return list(NOISE_MODELS.keys())


def apply_noise(rho: DensityMatrix, model: str, strength: float) -> DensityMatrix:
    """
    Degrade a state.

    white: (1 - s) rho + s I/d. dephasing: off-diagonals in the computational
    basis scaled by (1 - s).
    """
    if model not in NOISE_MODELS:
        available = ", ".join(list_noise_models())
        raise InvalidSourceConfig(f"Unknown noise model: {model}. Available: {available}")
    if not 0.0 <= strength <= 1.0:
        raise InvalidStrength(f"Noise strength must lie in [0, 1], got {strength}")
    if strength == 0.0:
        return rho
    return validate_density(NOISE_MODELS[model](rho, strength))


def projectors(setting: MeasurementSetting) -> list[tuple[tuple[int, int], np.ndarray]]:
    """The four two-photon projectors Pi_a (x) Pi_b of a setting, in OUTCOMES order."""
    first = BASES[setting.basis_A]
    second = BASES[setting.basis_B]
    result = []
    for a, b in OUTCOMES:
        vector = np.kron(first[a], second[b])
        result.append(((a, b), np.outer(vector, vector.conj())))
    return result


def projector_stack(settings: Sequence[MeasurementSetting]) -> np.ndarray:
    """All projectors of `settings` stacked as an array of shape (4 * n, 4, 4)."""
    return np.asarray([proj for setting in settings for _, proj in projectors(setting)])


def outcome_probabilities(rho: DensityMatrix, setting: MeasurementSetting) -> np.ndarray:
    """Born probabilities Tr(rho Pi_a (x) Pi_b) in OUTCOMES order."""
    stack = projector_stack([setting])
    probabilities = np.einsum("ij,kji->k", rho.matrix, stack).real
    return np.clip(probabilities, 0.0, None)


def stream(seed: int, index: int) -> np.random.Generator:
    """Independent counter-based random stream for (seed, index)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))


def simulate_counts(
    rho: DensityMatrix,
    settings: Sequence[MeasurementSetting],
    mean_counts: float,
    seed: int,
) -> list[CountRecord]:
    """
    Draw coincidence counts N^{a,b} ~ Poisson(N Tr(rho Pi_a (x) Pi_b)).

    Each setting has its own stream keyed by its index, so the output does
    not depend on the order or concurrency of evaluation.
    """
    if not mean_counts > 0:
        raise InvalidSourceConfig(f"mean_counts must be positive, got {mean_counts}")
    records = []
    for index, setting in enumerate(settings):
        means = mean_counts * outcome_probabilities(rho, setting)
        counts = stream(seed, index).poisson(means)
        records.append(CountRecord(setting, tuple(int(n) for n in counts)))
    return records


def joint_probability(record: CountRecord) -> np.ndarray:
    """P(a, b | x, y) = N^{a,b} / sum N."""
    total = record.total
    if total <= 0:
        raise EmptyRecord(f"Setting {record.setting.label} has no coincidences")
    return np.array([float(Fraction(n, total)) for n in record.counts])


def marginal_probability(records: Sequence[CountRecord], party: str = "A") -> list[tuple[MeasurementSetting, np.ndarray]]:
    """p(a | x) = sum_b P(a, b | x, y) per setting; party "A" or "B"."""
    if party not in ("A", "B"):
        raise InvalidSourceConfig(f"Unknown party '{party}', expected 'A' or 'B'")
    marginals = []
    for record in records:
        joint = joint_probability(record).reshape(2, 2)
        marginals.append((record.setting, joint.sum(axis=1 if party == "A" else 0)))
    return marginals


def records_to_json(records: Sequence[CountRecord]) -> str:
    return json.dumps([record.to_dict() for record in records], indent=2)


def records_from_json(text: Union[str, bytes]) -> list[CountRecord]:
    return records_from_data(json.loads(text))


def records_from_data(data) -> list[CountRecord]:
    if not isinstance(data, list):
        raise InvalidSourceConfig("Count file must contain a JSON array of records")
    return [CountRecord.from_dict(item) for item in data]
