from typing import NamedTuple, Sequence

import numpy as np
from scipy import stats

from planner.config import PlanConfig


class DemandEstimate(NamedTuple):
    estimate: float
    low: float
    high: float


def bootstrap_expected_demand(
    series: Sequence[float],
    config: PlanConfig,
    rng: np.random.Generator,
) -> DemandEstimate:
    """
    Resample the per-slot demand population with replacement, take the configured percentile of
    every resample and return the mean of those percentiles with its percentile confidence interval.
    """
    data = np.asarray(series, dtype=float)
    if data.size == 0:
        return DemandEstimate(0.0, 0.0, 0.0)
    if data.size == 1 or np.all(data == data[0]):
        return DemandEstimate(float(data[0]), float(data[0]), float(data[0]))

    result = stats.bootstrap(
        (data,),
        lambda sample, axis: np.percentile(sample, config.alpha, axis=axis),
        n_resamples=config.resamples,
        confidence_level=config.confidence,
        method="percentile",
        vectorized=True,
        random_state=rng,
    )
    return DemandEstimate(
        float(np.mean(result.bootstrap_distribution)),
        float(result.confidence_interval.low),
        float(result.confidence_interval.high),
    )
