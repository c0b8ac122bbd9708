from model.problem.exception import ValidationProblem
from model.substrate import SubstrateNetwork, Tier
from workload.applications import ApplicationSpec
from workload.trace import TraceSpec

MIN_UTILIZATION = 0.2
MAX_UTILIZATION = 2.0

NOMINAL_FOOTPRINT = ApplicationSpec().nominal_footprint


def expected_active_demand(spec: TraceSpec, substrate: SubstrateNetwork, footprint: float = NOMINAL_FOOTPRINT) -> float:
    """Steady-state node demand in CU: arrivals per slot x mean lifetime x mean size x application footprint."""
    edges = len(substrate.edge_nodes)
    return spec.mean_rate * spec.duration_mean * spec.size_mean * footprint * edges


def utilization_of(spec: TraceSpec, substrate: SubstrateNetwork, footprint: float = NOMINAL_FOOTPRINT) -> float:
    return expected_active_demand(spec, substrate, footprint) / substrate.total_capacity(Tier.EDGE)


def scale_to_utilization(
    spec: TraceSpec,
    target: float,
    substrate: SubstrateNetwork,
    footprint: float = NOMINAL_FOOTPRINT,
) -> TraceSpec:
    """
    Rescale the mean request size so the expected active demand equals `target` times the total
    edge node capacity. The size spread keeps its coefficient of variation.
    """
    if not MIN_UTILIZATION <= target <= MAX_UTILIZATION:
        raise ValidationProblem(
            detail=f"Utilization {target} is outside [{MIN_UTILIZATION}, {MAX_UTILIZATION}].",
        )
    edges = len(substrate.edge_nodes)
    capacity = substrate.total_capacity(Tier.EDGE)
    if edges == 0 or capacity <= 0 or spec.mean_rate <= 0 or footprint <= 0:
        raise ValidationProblem(detail="Utilization is undefined without edge capacity, arrivals and VNF sizes.")

    size_mean = target * capacity / (spec.mean_rate * spec.duration_mean * footprint * edges)
    size_std = spec.size_std * size_mean / spec.size_mean
    return spec.model_copy(update={"size_mean": size_mean, "size_std": size_std})
