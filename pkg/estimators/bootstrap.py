"""
Poissonian parametric bootstrap.

Each resample redraws every coincidence count from a Poisson distribution
whose mean is the observed count, then re-runs the statistic (which usually
includes a full reconstruction). Resample i always uses the random stream
(seed, i), and results are merged in index order, so the estimate does not
depend on how many workers ran it.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable, Sequence

import numpy as np
from tqdm import tqdm

from photonics import CountRecord, stream
from qstate import BatteryCapError

from .base import EstimatorError, StatisticFailure

logger = logging.getLogger(__name__)

MIN_RESAMPLES = 2


@dataclass(frozen=True)
class BootstrapEstimate:
    mean: float
    std: float
    resamples: int

    def to_dict(self) -> dict:
        return asdict(self)


def resample_records(records: Sequence[CountRecord], seed: int, index: int) -> list[CountRecord]:
    observed = np.array([record.counts for record in records], dtype=float)
    redrawn = stream(seed, index).poisson(observed)
    return [CountRecord(record.setting, tuple(int(n) for n in row)) for record, row in zip(records, redrawn)]


def bootstrap_estimates(
    records: Sequence[CountRecord],
    statistic: Callable[[list[CountRecord]], dict],
    resamples: int,
    seed: int,
    workers: int = 1,
    progress: bool = False,
) -> dict[str, BootstrapEstimate]:
    """
    Bootstrap several statistics evaluated on the same resamples.

    Args:
        records: Observed counts
        statistic: Maps resampled records to {name: value}
        resamples: Number of resamples, at least 2
        seed: Base seed of the resample streams
        workers: Thread count; 1 runs inline
        progress: Show a tqdm progress bar

    Returns:
        {name: BootstrapEstimate} with the sample standard deviation

    Raises:
        StatisticFailure: If the statistic fails on a resample
    """
    if resamples < MIN_RESAMPLES:
        raise EstimatorError(f"Bootstrap needs at least {MIN_RESAMPLES} resamples, got {resamples}")
    if workers < 1:
        raise EstimatorError(f"workers must be >= 1, got {workers}")

    def evaluate(index: int) -> dict:
        try:
            return dict(statistic(resample_records(records, seed, index)))
        except StatisticFailure:
            raise
        except (BatteryCapError, ArithmeticError, ValueError, np.linalg.LinAlgError) as e:
            raise StatisticFailure(index, f"{type(e).__name__}: {e}") from e

    logger.info("Bootstrap started: %d resamples, %d workers", resamples, workers)
    indices = range(resamples)
    with tqdm(total=resamples, desc="Bootstrap", disable=not progress, leave=False) as bar:
        if workers == 1:
            values = []
            for index in indices:
                values.append(evaluate(index))
                bar.update()
        else:
            values = []
            with ThreadPoolExecutor(max_workers=workers) as executor:
                # map yields in submission order
                for value in executor.map(evaluate, indices):
                    values.append(value)
                    bar.update()

    names = list(values[0])
    estimates = {}
    for name in names:
        samples = np.array([value[name] for value in values], dtype=float)
        estimates[name] = BootstrapEstimate(
            mean=float(np.mean(samples)),
            std=float(np.std(samples, ddof=1)),
            resamples=resamples,
        )
    logger.info("Bootstrap finished")
    return estimates


def bootstrap_error_bars(
    records: Sequence[CountRecord],
    statistic: Callable[[list[CountRecord]], float],
    resamples: int,
    seed: int,
    workers: int = 1,
    progress: bool = False,
) -> BootstrapEstimate:
    """Scalar form of bootstrap_estimates."""
    estimates = bootstrap_estimates(
        records,
        lambda resampled: {"value": float(statistic(resampled))},
        resamples,
        seed,
        workers=workers,
        progress=progress,
    )
    return estimates["value"]
