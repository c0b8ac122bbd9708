import numpy as np
import pytest

from planner.bootstrap import DemandEstimate, bootstrap_expected_demand
from planner.config import PlanConfig

CONFIG = PlanConfig(alpha=80, resamples=1000, seed=0)


@pytest.mark.parametrize(
    "series, expected",
    [
        ((), DemandEstimate(0.0, 0.0, 0.0)),
        ((7.0,), DemandEstimate(7.0, 7.0, 7.0)),
        ((3.0,) * 20, DemandEstimate(3.0, 3.0, 3.0)),
    ],
    ids=["empty", "single slot", "constant"],
)
def test_should_short_circuit_degenerate_series(series, expected):
    assert bootstrap_expected_demand(series, CONFIG, np.random.default_rng(0)) == expected


def test_should_estimate_the_percentile_of_the_demand():
    estimate = bootstrap_expected_demand(np.arange(100.0), CONFIG, np.random.default_rng(1))
    assert estimate.estimate == pytest.approx(np.percentile(np.arange(100.0), 80), abs=3)
    assert estimate.low <= estimate.estimate <= estimate.high


def test_should_grow_with_the_percentile():
    series = np.random.default_rng(2).poisson(20, size=200).astype(float)
    low = bootstrap_expected_demand(series, CONFIG.model_copy(update={"alpha": 50}), np.random.default_rng(3))
    high = bootstrap_expected_demand(series, CONFIG.model_copy(update={"alpha": 95}), np.random.default_rng(3))
    assert low.estimate < high.estimate


def test_should_reproduce_an_estimate_from_the_same_stream():
    series = np.random.default_rng(4).normal(50, 10, size=300)
    first = bootstrap_expected_demand(series, CONFIG, np.random.default_rng(5))
    second = bootstrap_expected_demand(series, CONFIG, np.random.default_rng(5))
    assert first == second


def test_should_need_at_least_100_resamples():
    with pytest.raises(ValueError):
        PlanConfig(resamples=10)

