import math
from functools import cached_property
from typing import Annotated, Any

from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, PlainSerializer, RootModel, model_validator

from model.problem.exception import ValidationProblem
from model.substrate import SubstrateNetwork

FORBIDDEN: float = math.inf


def _parse_efficiency(value: Any) -> Any:
    if isinstance(value, str) and value.strip().lower() == "forbidden":
        return FORBIDDEN
    return value


def _dump_efficiency(value: float) -> float | str:
    return "forbidden" if math.isinf(value) else value


# Serialized as the literal "forbidden" so JSON documents stay standard (no Infinity).
Efficiency = Annotated[
    float,
    BeforeValidator(_parse_efficiency),
    Field(ge=0),
    PlainSerializer(_dump_efficiency, return_type=float | str),
]


def is_forbidden(value: float) -> bool:
    return math.isinf(value)


class VirtualNode(BaseModel):
    model_config = ConfigDict(frozen=True)

    id: str = Field(min_length=1)
    size: float = Field(ge=0, allow_inf_nan=False)


class VirtualLink(BaseModel):
    """A directed parent -> child edge of the application tree."""

    model_config = ConfigDict(frozen=True)

    id: str = Field(min_length=1)
    parent: str
    child: str
    size: float = Field(ge=0, allow_inf_nan=False)


class EfficiencyOverride(BaseModel):
    model_config = ConfigDict(frozen=True)

    virtual: str
    substrate: str
    value: Efficiency


class EfficiencyMap(RootModel[tuple[EfficiencyOverride, ...]]):
    """Sparse (virtual element, substrate element) -> efficiency coefficient; unlisted pairs are 1."""

    model_config = ConfigDict(frozen=True)

    root: tuple[EfficiencyOverride, ...] = ()

    @cached_property
    def lookup(self) -> dict[tuple[str, str], float]:
        return {(o.virtual, o.substrate): o.value for o in self.root}

    def get(self, virtual: str, substrate: str) -> float:
        return self.lookup.get((virtual, substrate), 1.0)

    def forbids(self, virtual: str, substrate: str) -> bool:
        return is_forbidden(self.get(virtual, substrate))


class Application(BaseModel):
    """
    A rooted virtual network. The root is the user ingress point: it has size zero and is always
    pinned to the origin of a request. Chains are trees where every node has at most one child.
    """

    model_config = ConfigDict(frozen=True)

    id: str = Field(min_length=1)
    kind: str = "chain"
    root: str = "u"
    nodes: tuple[VirtualNode, ...]
    links: tuple[VirtualLink, ...] = ()
    efficiency: EfficiencyMap = EfficiencyMap()

    @model_validator(mode="after")
    def _check_tree(self) -> "Application":
        ids = [n.id for n in self.nodes] + [link.id for link in self.links]
        duplicates = sorted({i for i in ids if ids.count(i) > 1})
        if duplicates:
            raise ValidationProblem(detail=f"Application '{self.id}' repeats element ids {duplicates}.")

        node_ids = {n.id for n in self.nodes}
        if self.root not in node_ids:
            raise ValidationProblem(detail=f"Application '{self.id}' has no root node '{self.root}'.")
        if self.size_of(self.root) != 0:
            raise ValidationProblem(detail=f"Root '{self.root}' of application '{self.id}' must have size 0.")

        incoming: dict[str, int] = {n: 0 for n in node_ids}
        for link in self.links:
            if link.parent not in node_ids or link.child not in node_ids:
                raise ValidationProblem(detail=f"Virtual link '{link.id}' references an unknown node.")
            incoming[link.child] += 1
        if incoming[self.root] != 0:
            raise ValidationProblem(detail=f"Root '{self.root}' of application '{self.id}' has a parent.")
        orphans = sorted(n for n, count in incoming.items() if n != self.root and count != 1)
        if orphans:
            raise ValidationProblem(
                detail=f"Application '{self.id}' is not a rooted tree: nodes {orphans} need exactly one parent."
            )
        if len(self.topological_order) != len(self.nodes):
            raise ValidationProblem(detail=f"Application '{self.id}' is not connected to its root.")

        for override in self.efficiency.root:
            if override.virtual not in ids:
                raise ValidationProblem(
                    detail=f"Efficiency override references unknown virtual element '{override.virtual}'."
                )
        return self

    @cached_property
    def node_by_id(self) -> dict[str, VirtualNode]:
        return {n.id: n for n in self.nodes}

    @cached_property
    def link_by_id(self) -> dict[str, VirtualLink]:
        return {link.id: link for link in self.links}

    @cached_property
    def children(self) -> dict[str, tuple[VirtualLink, ...]]:
        grouped: dict[str, list[VirtualLink]] = {n.id: [] for n in self.nodes}
        for link in self.links:
            grouped[link.parent].append(link)
        return {k: tuple(v) for k, v in grouped.items()}

    @cached_property
    def parent_link(self) -> dict[str, VirtualLink]:
        return {link.child: link for link in self.links}

    @cached_property
    def topological_order(self) -> tuple[str, ...]:
        """Virtual nodes, parents before children, siblings in declaration order."""
        order, frontier = [], [self.root]
        while frontier:
            current = frontier.pop(0)
            order.append(current)
            frontier.extend(link.child for link in self.children.get(current, ()))
        return tuple(order)

    @cached_property
    def ordered_links(self) -> tuple[VirtualLink, ...]:
        return tuple(self.parent_link[n] for n in self.topological_order[1:])

    @cached_property
    def vnfs(self) -> tuple[str, ...]:
        return self.topological_order[1:]

    @cached_property
    def root_links(self) -> tuple[VirtualLink, ...]:
        return self.children[self.root]

    def size_of(self, element: str) -> float:
        if element in self.node_by_id:
            return self.node_by_id[element].size
        return self.link_by_id[element].size

    def is_link(self, element: str) -> bool:
        return element in self.link_by_id

    def eta(self, virtual: str, substrate: str) -> float:
        return self.efficiency.get(virtual, substrate)

    def check_efficiency(self, substrate: SubstrateNetwork) -> None:
        """Overrides pair virtual nodes with substrate nodes and virtual links with substrate links."""
        for override in self.efficiency.root:
            if override.substrate not in substrate.index:
                raise ValidationProblem(
                    detail=f"Application '{self.id}' overrides unknown substrate element '{override.substrate}'.",
                )
            if self.is_link(override.virtual) == substrate.is_node(override.substrate):
                raise ValidationProblem(
                    detail=f"Application '{self.id}' pairs '{override.virtual}' with '{override.substrate}'; "
                    "nodes map to nodes and links to links.",
                )

    @property
    def vnf_footprint(self) -> float:
        """Total size of the virtual nodes, i.e. the node capacity a unit request consumes when η is 1."""
        return float(sum(n.size for n in self.nodes))
