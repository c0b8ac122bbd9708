"""
Builders shared by the unit and integration suites.

The two-node substrate is the hand-solvable instance used throughout: an expensive edge
datacenter A (50 per CU), a cheap core datacenter B (1 per CU) and one link between them (1 per CU).
"""

from pathlib import Path

import networkx as nx
import numpy as np

from model.application import Application, EfficiencyMap, EfficiencyOverride, VirtualLink, VirtualNode
from model.embedding import Embedding
from model.request import Request
from model.substrate import SubstrateLink, SubstrateNetwork, SubstrateNode, Tier
from planner.plan import Plan, PlanAggregate, Template
from workload.trace import Trace

RESOURCES = Path(__file__).parent / "resources"


def resource_path_for(name: str) -> Path:
    return RESOURCES / name


def two_node_substrate(
    a_capacity: float = 200_000, b_capacity: float = 200_000, link_capacity: float = 100_000
) -> SubstrateNetwork:
    return SubstrateNetwork(
        name="two-node",
        nodes=(
            SubstrateNode(id="A", tier=Tier.EDGE, capacity=a_capacity, unit_cost=50),
            SubstrateNode(id="B", tier=Tier.CORE, capacity=b_capacity, unit_cost=1),
        ),
        links=(SubstrateLink(id="A-B", source="A", target="B", tier=Tier.EDGE, capacity=link_capacity, unit_cost=1),),
    )


def triangle_substrate(costs: dict[str, float], capacities: dict[str, float] | None = None) -> SubstrateNetwork:
    """Nodes A (edge), B and C fully connected by links of cost 1."""
    capacities = capacities or {}
    tiers = {"A": Tier.EDGE, "B": Tier.TRANSPORT, "C": Tier.CORE}
    return SubstrateNetwork(
        name="triangle",
        nodes=tuple(
            SubstrateNode(id=n, tier=tiers[n], capacity=capacities.get(n, 200_000), unit_cost=costs[n])
            for n in ("A", "B", "C")
        ),
        links=tuple(
            SubstrateLink(id=f"{u}-{v}", source=u, target=v, tier=Tier.EDGE, capacity=100_000, unit_cost=1)
            for u, v in (("A", "B"), ("A", "C"), ("B", "C"))
        ),
    )


def random_substrate(rng: np.random.Generator, nodes: int = 5, links: int = 7) -> SubstrateNetwork:
    """Connected random graph with random costs and capacities; node n0 is the only edge node."""
    while True:
        graph = nx.gnm_random_graph(nodes, links, seed=int(rng.integers(0, 2**31)))
        if nx.is_connected(graph):
            break
    return SubstrateNetwork(
        name="random",
        nodes=tuple(
            SubstrateNode(
                id=f"n{i}",
                tier=Tier.EDGE if i == 0 else Tier.CORE,
                capacity=float(rng.uniform(100, 2_000)),
                unit_cost=float(rng.uniform(1, 50)),
            )
            for i in range(nodes)
        ),
        links=tuple(
            SubstrateLink(
                id=f"n{u}-n{v}",
                source=f"n{u}",
                target=f"n{v}",
                tier=Tier.EDGE,
                capacity=float(rng.uniform(50, 2_000)),
                unit_cost=float(rng.uniform(1, 5)),
            )
            for u, v in sorted(graph.edges)
        ),
    )


def single_vnf_app(
    app_id: str = "app",
    vnf_size: float = 50,
    link_size: float = 50,
    efficiency: tuple[tuple[str, str, float | str], ...] = (),
) -> Application:
    """u -> f1 with sizes 0 and `vnf_size`, the link sized `link_size`."""
    return Application(
        id=app_id,
        nodes=(VirtualNode(id="u", size=0), VirtualNode(id="f1", size=vnf_size)),
        links=(VirtualLink(id="u-f1", parent="u", child="f1", size=link_size),),
        efficiency=EfficiencyMap(tuple(EfficiencyOverride(virtual=q, substrate=s, value=v) for q, s, v in efficiency)),
    )


def chain_app(
    app_id: str = "chain",
    sizes: tuple[float, ...] = (50, 50),
    link_sizes: tuple[float, ...] | None = None,
    efficiency: tuple[tuple[str, str, float | str], ...] = (),
) -> Application:
    vnfs = [f"f{i}" for i in range(1, len(sizes) + 1)]
    link_sizes = link_sizes if link_sizes is not None else tuple(1.0 for _ in vnfs)
    order = ["u", *vnfs]
    return Application(
        id=app_id,
        nodes=(VirtualNode(id="u", size=0), *(VirtualNode(id=v, size=s) for v, s in zip(vnfs, sizes))),
        links=tuple(
            VirtualLink(id=f"{p}-{c}", parent=p, child=c, size=s) for p, c, s in zip(order, order[1:], link_sizes)
        ),
        efficiency=EfficiencyMap(tuple(EfficiencyOverride(virtual=q, substrate=s, value=v) for q, s, v in efficiency)),
    )


def request(
    request_id: int = 0,
    app: str = "app",
    origin: str = "A",
    size: float = 10,
    arrival: int = 0,
    duration: int = 5,
) -> Request:
    return Request(id=request_id, app=app, origin=origin, size=size, arrival=arrival, duration=duration)


def trace_of(*requests: Request, history_slots: int = 0, test_slots: int | None = None) -> Trace:
    last = max((r.departure for r in requests), default=history_slots + 1)
    return Trace(
        requests=tuple(sorted(requests, key=lambda r: r.arrival)),
        history_slots=history_slots,
        test_slots=test_slots if test_slots is not None else max(last - history_slots, 1),
    )


def embedding_at(host: str, origin: str = "A", path: tuple[str, ...] | None = None) -> Embedding:
    """Single-VNF embedding with f1 on `host`; the link follows `path` or the direct hop."""
    hops = path if path is not None else ((origin,) if host == origin else (origin, host))
    return Embedding(node_map={"u": origin, "f1": host}, paths={"u-f1": hops})


def one_template_plan(
    host: str = "B",
    weight: float = 1.0,
    expected_demand: float = 10.0,
    app: str = "app",
    origin: str = "A",
) -> Plan:
    template = Template(
        id=f"{app}@{origin}#0",
        embedding=embedding_at(host, origin).model_copy(update={"planned": True}),
        weight=weight,
    )
    return Plan(
        aggregates=(
            PlanAggregate(
                app=app,
                origin=origin,
                expected_demand=expected_demand,
                allocated=weight,
                templates=(template,),
            ),
        )
    )
