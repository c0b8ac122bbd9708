import json
from functools import cache
from pathlib import Path
from typing import Literal

import networkx as nx
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from config import logging_configurator
from model.problem.exception import TopologyProblem, ValidationProblem
from model.substrate import SubstrateLink, SubstrateNetwork, SubstrateNode, Tier

LOGGER = logging_configurator.logger(__name__)

PRESETS_DIR = Path(__file__).parent / "presets"

CORE_SHARE = 0.1
TRANSPORT_SHARE = 0.3


class TierParameters(BaseModel):
    model_config = ConfigDict(frozen=True)

    node_capacity: float = Field(ge=0)
    link_capacity: float = Field(ge=0)
    node_cost: float = Field(ge=0)
    link_cost: float = Field(ge=0)


def default_tier_parameters() -> dict[Tier, TierParameters]:
    return {
        Tier.EDGE: TierParameters(node_capacity=200_000, link_capacity=100_000, node_cost=50, link_cost=1),
        Tier.TRANSPORT: TierParameters(node_capacity=600_000, link_capacity=300_000, node_cost=10, link_cost=1),
        Tier.CORE: TierParameters(node_capacity=1_800_000, link_capacity=900_000, node_cost=1, link_cost=1),
    }


class Preset(BaseModel):
    name: str
    description: str = ""
    generator: Literal["explicit", "recursive-tree"]
    nodes: int = Field(ge=1)
    links: int = Field(ge=0)
    seed: int = 0
    tiers: dict[str, Tier] | None = None
    edges: list[tuple[str, str]] | None = None


@cache
def load_preset(name: str) -> Preset:
    path = PRESETS_DIR / f"{name}.json"
    if not path.exists():
        known = sorted(p.stem for p in PRESETS_DIR.glob("*.json"))
        raise ValidationProblem(detail=f"Unknown topology preset '{name}'. Known presets: {known}.")
    return Preset.model_validate(json.loads(path.read_text()))


def preset_names() -> list[str]:
    return sorted(p.stem for p in PRESETS_DIR.glob("*.json"))


class TopologySpec(BaseModel):
    """
    How to build a substrate: either a named preset or an explicit edge list, with optional tier
    labels (unlabelled graphs are tiered by closeness centrality).
    """

    model_config = ConfigDict(frozen=True)

    preset: str | None = None
    edges: list[tuple[str, str]] | None = None
    tiers: dict[str, Tier] | None = None
    tier_parameters: dict[Tier, TierParameters] = Field(default_factory=default_tier_parameters)
    cost_jitter: float = Field(default=0.5, ge=0, lt=1)
    gpu: bool = False
    gpu_edge_nodes: int = Field(default=4, ge=0)
    gpu_capacity_share: float = Field(default=0.25, gt=0, lt=1)
    seed: int = 0

    @model_validator(mode="after")
    def _check_source(self) -> "TopologySpec":
        if (self.preset is None) == (self.edges is None):
            raise ValidationProblem(detail="A topology spec needs exactly one of 'preset' or 'edges'.")
        missing = [tier.value for tier in Tier if tier not in self.tier_parameters]
        if missing:
            raise ValidationProblem(detail=f"Tier parameters missing for {missing}.")
        return self


def _node_name(i: int, width: int) -> str:
    return f"n{i:0{width}d}"


def _recursive_tree(nodes: int, links: int, seed: int) -> nx.Graph:
    """A random recursive tree plus uniformly drawn chords; always connected."""
    rng = np.random.default_rng(seed)
    width = max(2, len(str(nodes - 1)))
    names = [_node_name(i, width) for i in range(nodes)]
    graph = nx.Graph()
    graph.add_nodes_from(names)
    for i in range(1, nodes):
        graph.add_edge(names[int(rng.integers(0, i))], names[i])
    extra = links - graph.number_of_edges()
    candidates = [(u, v) for i, u in enumerate(names) for v in names[i + 1 :] if not graph.has_edge(u, v)]
    if extra > len(candidates):
        raise TopologyProblem(detail=f"Cannot place {links} links on {nodes} nodes.")
    if extra > 0:
        for k in sorted(rng.choice(len(candidates), size=extra, replace=False)):
            graph.add_edge(*candidates[k])
    return graph


def base_graph(spec: TopologySpec) -> tuple[nx.Graph, dict[str, Tier] | None]:
    if spec.edges is not None:
        graph = nx.Graph()
        graph.add_nodes_from(sorted(spec.tiers) if spec.tiers else [])
        graph.add_edges_from(spec.edges)
        return graph, spec.tiers

    preset = load_preset(spec.preset)
    match preset.generator:
        case "explicit":
            graph = nx.Graph()
            graph.add_nodes_from(preset.tiers or [])
            graph.add_edges_from(preset.edges or [])
        case "recursive-tree":
            graph = _recursive_tree(preset.nodes, preset.links, preset.seed)
    return graph, preset.tiers if spec.tiers is None else spec.tiers


def assign_tiers(graph: nx.Graph) -> dict[str, Tier]:
    """The most central 10% of nodes become core, the next 30% transport, the rest edge."""
    n = graph.number_of_nodes()
    closeness = nx.closeness_centrality(graph)
    ranked = sorted(graph.nodes, key=lambda v: (-closeness[v], v))
    cores = max(1, round(CORE_SHARE * n)) if n >= 3 else 0
    transports = max(1, round(TRANSPORT_SHARE * n)) if n >= 3 else 0
    tiers = {}
    for position, node in enumerate(ranked):
        if position < cores:
            tiers[node] = Tier.CORE
        elif position < cores + transports:
            tiers[node] = Tier.TRANSPORT
        else:
            tiers[node] = Tier.EDGE
    return tiers


def _lower_tier(a: Tier, b: Tier) -> Tier:
    return a if a.rank <= b.rank else b


def build_topology(spec: TopologySpec) -> SubstrateNetwork:
    graph, tiers = base_graph(spec)
    if graph.number_of_nodes() == 0:
        raise TopologyProblem(detail="The base graph has no nodes.")
    if not nx.is_connected(graph):
        components = sorted(sorted(c) for c in nx.connected_components(graph))
        raise TopologyProblem(
            detail=f"The base graph is disconnected ({len(components)} components).",
            errors=[{"component": component} for component in components],
        )
    if tiers is None:
        tiers = assign_tiers(graph)
    uncovered = sorted(set(graph.nodes) - set(tiers))
    if uncovered:
        raise TopologyProblem(detail=f"No tier assigned to nodes {uncovered}.")

    rng = np.random.default_rng(spec.seed)
    names = sorted(graph.nodes)
    low, high = 1 - spec.cost_jitter, 1 + spec.cost_jitter
    jitter = rng.uniform(low, high, size=len(names))

    nodes = [
        SubstrateNode(
            id=name,
            tier=tiers[name],
            capacity=spec.tier_parameters[tiers[name]].node_capacity,
            unit_cost=spec.tier_parameters[tiers[name]].node_cost * float(factor),
        )
        for name, factor in zip(names, jitter)
    ]
    links = []
    for u, v in sorted(tuple(sorted(edge)) for edge in graph.edges):
        tier = _lower_tier(tiers[u], tiers[v])
        links.append(
            SubstrateLink(
                id=f"{u}-{v}",
                source=u,
                target=v,
                tier=tier,
                capacity=spec.tier_parameters[tier].link_capacity,
                unit_cost=spec.tier_parameters[tier].link_cost,
            )
        )

    if spec.gpu:
        nodes, links = _split_gpu_sites(spec, nodes, links, rng)

    substrate = SubstrateNetwork(name=spec.preset or "custom", nodes=tuple(nodes), links=tuple(links))
    LOGGER.info(
        "Built substrate",
        extra={"substrate": substrate.name, "nodes": len(substrate.nodes), "links": len(substrate.links)},
    )
    return substrate


def _split_gpu_sites(
    spec: TopologySpec,
    nodes: list[SubstrateNode],
    links: list[SubstrateLink],
    rng: np.random.Generator,
) -> tuple[list[SubstrateNode], list[SubstrateLink]]:
    """
    Every core site and a seeded choice of edge sites gets a GPU twin holding a share of the site's
    capacity, joined to the remaining non-GPU node by an intra-datacenter link.
    """
    edge_sites = [node.id for node in nodes if node.tier == Tier.EDGE]
    chosen = min(spec.gpu_edge_nodes, len(edge_sites))
    picked = {edge_sites[i] for i in rng.choice(len(edge_sites), size=chosen, replace=False)} if chosen else set()
    sites = {node.id for node in nodes if node.tier == Tier.CORE} | picked

    split_nodes, split_links = [], list(links)
    for node in nodes:
        if node.id not in sites:
            split_nodes.append(node)
            continue
        twin_capacity = node.capacity * spec.gpu_capacity_share
        split_nodes.append(node.model_copy(update={"capacity": node.capacity - twin_capacity}))
        twin = node.model_copy(update={"id": f"{node.id}-gpu", "capacity": twin_capacity, "gpu": True})
        split_nodes.append(twin)
        split_links.append(
            SubstrateLink(
                id=f"{node.id}-dc",
                source=node.id,
                target=twin.id,
                tier=node.tier,
                capacity=spec.tier_parameters[node.tier].link_capacity,
                unit_cost=0.0,
            )
        )
    return split_nodes, split_links

