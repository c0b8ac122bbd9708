from enum import Enum
from functools import cached_property
from typing import ClassVar

import networkx as nx
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from model.problem.exception import TopologyProblem


class Tier(str, Enum):
    EDGE = "edge"
    TRANSPORT = "transport"
    CORE = "core"

    @property
    def rank(self) -> int:
        return _TIER_RANK[self]


_TIER_RANK = {Tier.EDGE: 0, Tier.TRANSPORT: 1, Tier.CORE: 2}


class ElementKind(str, Enum):
    NODE = "node"
    LINK = "link"


class SubstrateNode(BaseModel):
    """A datacenter."""

    model_config = ConfigDict(frozen=True)

    kind: ClassVar[ElementKind] = ElementKind.NODE

    id: str = Field(min_length=1)
    tier: Tier
    capacity: float = Field(ge=0, allow_inf_nan=False)
    unit_cost: float = Field(ge=0, allow_inf_nan=False)
    gpu: bool = False


class SubstrateLink(BaseModel):
    """An undirected connection between two datacenters with a single shared capacity."""

    model_config = ConfigDict(frozen=True)

    kind: ClassVar[ElementKind] = ElementKind.LINK

    id: str = Field(min_length=1)
    source: str
    target: str
    tier: Tier
    capacity: float = Field(ge=0, allow_inf_nan=False)
    unit_cost: float = Field(ge=0, allow_inf_nan=False)

    @property
    def endpoints(self) -> frozenset[str]:
        return frozenset((self.source, self.target))

    def other(self, node: str) -> str:
        return self.target if node == self.source else self.source


SubstrateElement = SubstrateNode | SubstrateLink


class SubstrateNetwork(BaseModel):
    """
    The physical network. Elements are indexed with nodes first (in declaration order) followed by
    links; every load vector in the simulator uses this indexing.
    """

    model_config = ConfigDict(frozen=True)

    name: str = "substrate"
    nodes: tuple[SubstrateNode, ...]
    links: tuple[SubstrateLink, ...] = ()

    @model_validator(mode="after")
    def _check_structure(self) -> "SubstrateNetwork":
        if not self.nodes:
            raise TopologyProblem(detail="A substrate needs at least one node.")

        seen: set[str] = set()
        for element in (*self.nodes, *self.links):
            if element.id in seen:
                raise TopologyProblem(detail=f"Duplicate substrate element id '{element.id}'.")
            seen.add(element.id)

        node_ids = {node.id for node in self.nodes}
        pairs: set[frozenset[str]] = set()
        for link in self.links:
            missing = [end for end in (link.source, link.target) if end not in node_ids]
            if missing:
                raise TopologyProblem(detail=f"Link '{link.id}' references unknown node(s) {missing}.")
            if link.source == link.target:
                raise TopologyProblem(detail=f"Link '{link.id}' is a self loop on '{link.source}'.")
            if link.endpoints in pairs:
                raise TopologyProblem(detail=f"Link '{link.id}' duplicates the connection {sorted(link.endpoints)}.")
            pairs.add(link.endpoints)

        if not nx.is_connected(self.graph):
            components = sorted(sorted(c) for c in nx.connected_components(self.graph))
            raise TopologyProblem(
                detail=f"Substrate graph is disconnected ({len(components)} components).",
                errors=[{"component": component} for component in components],
            )
        return self

    @cached_property
    def graph(self) -> nx.Graph:
        graph = nx.Graph()
        for node in self.nodes:
            graph.add_node(node.id)
        for link in self.links:
            graph.add_edge(link.source, link.target, link=link.id)
        return graph

    @cached_property
    def element_ids(self) -> tuple[str, ...]:
        return tuple(node.id for node in self.nodes) + tuple(link.id for link in self.links)

    @cached_property
    def elements(self) -> tuple[SubstrateElement, ...]:
        return (*self.nodes, *self.links)

    @cached_property
    def index(self) -> dict[str, int]:
        return {element_id: i for i, element_id in enumerate(self.element_ids)}

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    @property
    def size(self) -> int:
        return len(self.nodes) + len(self.links)

    @cached_property
    def capacities(self) -> np.ndarray:
        values = np.array([element.capacity for element in self.elements], dtype=float)
        values.setflags(write=False)
        return values

    @cached_property
    def unit_costs(self) -> np.ndarray:
        values = np.array([element.unit_cost for element in self.elements], dtype=float)
        values.setflags(write=False)
        return values

    @cached_property
    def node_by_id(self) -> dict[str, SubstrateNode]:
        return {node.id: node for node in self.nodes}

    @cached_property
    def link_by_id(self) -> dict[str, SubstrateLink]:
        return {link.id: link for link in self.links}

    @cached_property
    def link_by_endpoints(self) -> dict[frozenset[str], SubstrateLink]:
        return {link.endpoints: link for link in self.links}

    @cached_property
    def arcs(self) -> tuple[tuple[str, str, str], ...]:
        """Directed arcs (tail, head, link id); every undirected link yields both directions."""
        arcs = []
        for link in self.links:
            arcs.append((link.source, link.target, link.id))
            arcs.append((link.target, link.source, link.id))
        return tuple(arcs)

    @cached_property
    def out_arcs(self) -> dict[str, tuple[tuple[str, str, str], ...]]:
        grouped: dict[str, list[tuple[str, str, str]]] = {node.id: [] for node in self.nodes}
        for arc in self.arcs:
            grouped[arc[0]].append(arc)
        return {node: tuple(sorted(arcs, key=lambda a: (a[1], a[2]))) for node, arcs in grouped.items()}

    def element(self, element_id: str) -> SubstrateElement:
        return self.elements[self.index[element_id]]

    def is_node(self, element_id: str) -> bool:
        return element_id in self.node_by_id

    def link_between(self, u: str, v: str) -> SubstrateLink:
        try:
            return self.link_by_endpoints[frozenset((u, v))]
        except KeyError:
            raise TopologyProblem(detail=f"No substrate link between '{u}' and '{v}'.") from None

    def nodes_in_tier(self, tier: Tier) -> tuple[SubstrateNode, ...]:
        return tuple(node for node in self.nodes if node.tier == tier)

    @property
    def edge_nodes(self) -> tuple[SubstrateNode, ...]:
        return self.nodes_in_tier(Tier.EDGE)

    def total_capacity(self, tier: Tier) -> float:
        return float(sum(node.capacity for node in self.nodes_in_tier(tier)))
