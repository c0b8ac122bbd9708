import pytest

from model.problem.exception import ValidationProblem
from workload.topology import TopologySpec, build_topology
from workload.trace import TraceSpec
from workload.utilization import NOMINAL_FOOTPRINT, scale_to_utilization, utilization_of


@pytest.fixture(scope="module")
def tiered():
    return build_topology(TopologySpec(preset="tiered-10"))


def test_should_assume_four_vnfs_of_50_as_the_nominal_footprint():
    assert NOMINAL_FOOTPRINT == 200


@pytest.mark.parametrize("target, size_mean", [(0.6, 6.0), (1.0, 10.0), (1.4, 14.0)])
def test_should_scale_the_request_size_to_the_target(tiered, target, size_mean):
    scaled = scale_to_utilization(TraceSpec(), target, tiered)
    assert scaled.size_mean == pytest.approx(size_mean), "6 edge nodes of 200000 CU at 10 arrivals of lifetime 10"
    assert utilization_of(scaled, tiered) == pytest.approx(target)


def test_should_keep_the_coefficient_of_variation(tiered):
    scaled = scale_to_utilization(TraceSpec(size_mean=10, size_std=2), 1.4, tiered)
    assert scaled.size_std / scaled.size_mean == pytest.approx(0.2)


def test_should_follow_the_actual_footprint(tiered):
    nominal = scale_to_utilization(TraceSpec(), 1.0, tiered)
    heavy = scale_to_utilization(TraceSpec(), 1.0, tiered, footprint=2 * NOMINAL_FOOTPRINT)
    assert heavy.size_mean == pytest.approx(nominal.size_mean / 2)


@pytest.mark.parametrize("target", [0.0, 0.1, 2.5])
def test_should_refuse_utilizations_out_of_range(tiered, target):
    with pytest.raises(ValidationProblem):
        scale_to_utilization(TraceSpec(), target, tiered)


def test_should_refuse_a_silent_workload(tiered):
    with pytest.raises(ValidationProblem):
        scale_to_utilization(TraceSpec(rate=0), 1.0, tiered)
