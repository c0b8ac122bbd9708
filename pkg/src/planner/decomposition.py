import networkx as nx
import numpy as np

from config import logging_configurator
from model.application import Application
from model.embedding import Embedding
from model.problem.exception import DecompositionProblem
from model.substrate import SubstrateNetwork
from planner.aggregation import AggregateRequest
from planner.plan import Plan, PlanAggregate, Template
from planner.pvne import AggregateBlock, LPModel
from planner.solver import LPSolution

LOGGER = logging_configurator.logger(__name__)

POSITIVE = 1e-9
EXHAUSTED = 1e-6
UNDECOMPOSABLE = 1e-4


class _Residual:
    """Mutable copy of one aggregate's node and flow masses, consumed as templates are peeled off."""

    def __init__(self, block: AggregateBlock, x: np.ndarray) -> None:
        self.nodes = {key: float(x[i]) for key, i in block.nodes.items() if x[i] > POSITIVE}
        self.flows = {key: float(x[i]) for key, i in block.flows.items() if x[i] > POSITIVE}

    def node(self, q: str, s: str) -> float:
        return self.nodes.get((q, s), 0.0)

    def flow(self, link: str, tail: str, head: str) -> float:
        return self.flows.get((link, tail, head), 0.0)

    def take(self, store: dict, key: tuple, amount: float) -> None:
        left = store[key] - amount
        if left > POSITIVE:
            store[key] = left
        else:
            del store[key]

    def cancel_cycle(self, link: str, cycle: list[str]) -> None:
        arcs = list(zip(cycle, cycle[1:] + cycle[:1]))
        amount = min(self.flow(link, u, v) for u, v in arcs)
        for u, v in arcs:
            self.take(self.flows, (link, u, v), amount)

    def cancel_all_cycles(self, link: str) -> None:
        while True:
            graph = nx.DiGraph([(u, v) for (name, u, v) in self.flows if name == link])
            try:
                cycle = [u for u, _ in nx.find_cycle(graph)]
            except nx.NetworkXNoCycle:
                return
            self.cancel_cycle(link, cycle)

    def leftover(self) -> float:
        return max([*self.nodes.values(), *self.flows.values(), 0.0])


def _route(
    residual: _Residual, link: str, child: str, start: str, substrate: SubstrateNetwork
) -> tuple[str, ...] | None:
    """
    Follow positive flow of `link` from `start` until a node hosting mass of `child` is reached.
    The collocated host is preferred, neighbours are explored in id order and any flow cycle met on
    the way is cancelled before searching again.
    """
    while True:
        path = [start]
        seen = {start: 0}
        while residual.node(child, path[-1]) <= POSITIVE:
            current = path[-1]
            step = next(
                (head for _, head, _ in substrate.out_arcs[current] if residual.flow(link, current, head) > POSITIVE),
                None,
            )
            if step is None:
                return None
            if step in seen:
                residual.cancel_cycle(link, path[seen[step] :])
                break
            seen[step] = len(path)
            path.append(step)
        else:
            return tuple(path)


def _peel(
    residual: _Residual, app: Application, origin: str, substrate: SubstrateNetwork
) -> tuple[dict[str, str], dict[str, tuple[str, ...]]] | None:
    node_map = {app.root: origin}
    paths: dict[str, tuple[str, ...]] = {}
    for link in app.ordered_links:
        path = _route(residual, link.id, link.child, node_map[link.parent], substrate)
        if path is None:
            return None
        node_map[link.child] = path[-1]
        paths[link.id] = path
    return node_map, paths


def _decompose(
    block: AggregateBlock, x: np.ndarray, app: Application, substrate: SubstrateNetwork
) -> list[tuple[dict[str, str], dict[str, tuple[str, ...]], float]]:
    origin = block.key[1]
    residual = _Residual(block, x)
    found: dict[tuple, tuple[dict[str, str], dict[str, tuple[str, ...]], float]] = {}

    while residual.node(app.root, origin) > EXHAUSTED:
        peeled = _peel(residual, app, origin, substrate)
        if peeled is None:
            break
        node_map, paths = peeled
        weight = min(
            [residual.node(q, host) for q, host in node_map.items()]
            + [residual.flow(link, u, v) for link, hops in paths.items() for u, v in zip(hops, hops[1:])]
        )
        for q, host in node_map.items():
            residual.take(residual.nodes, (q, host), weight)
        for link, hops in paths.items():
            for u, v in zip(hops, hops[1:]):
                residual.take(residual.flows, (link, u, v), weight)

        signature = (tuple(sorted(node_map.items())), tuple(sorted(paths.items())))
        previous = found.get(signature)
        found[signature] = (node_map, paths, weight + (previous[2] if previous else 0.0))

    for link in app.ordered_links:
        residual.cancel_all_cycles(link.id)
    leftover = residual.leftover()
    if leftover > UNDECOMPOSABLE:
        raise DecompositionProblem(
            detail=f"Plan of aggregate {block.key} leaves {leftover:.3g} undecomposed mass.",
            errors=[{"node": list(k), "mass": v} for k, v in residual.nodes.items()]
            + [{"flow": list(k), "mass": v} for k, v in residual.flows.items()],
        )
    if leftover > EXHAUSTED:
        LOGGER.warning("Undecomposed plan mass below threshold", extra={"aggregate": block.key, "mass": leftover})

    return sorted(found.values(), key=lambda t: (tuple(t[0][q] for q in app.topological_order), sorted(t[1].items())))


def extract_templates(
    model: LPModel,
    solution: LPSolution,
    aggregates: tuple[AggregateRequest, ...],
    applications: dict[str, Application],
    substrate: SubstrateNetwork,
    quantiles: int,
    history_slots: int = 0,
) -> Plan:
    blocks = {block.key: block for block in model.blocks}
    x = solution.x
    planned = []
    for aggregate in aggregates:
        block = blocks.get(aggregate.key)
        if block is None:
            planned.append(
                PlanAggregate(
                    app=aggregate.app,
                    origin=aggregate.origin,
                    expected_demand=aggregate.expected_demand,
                    ci_low=aggregate.ci_low,
                    ci_high=aggregate.ci_high,
                    psi=aggregate.psi,
                )
            )
            continue

        app = applications[aggregate.app]
        templates = tuple(
            Template(
                id=f"{aggregate.app}@{aggregate.origin}#{k}",
                embedding=Embedding(node_map=node_map, paths=paths, planned=True),
                weight=min(weight, 1.0),
            )
            for k, (node_map, paths, weight) in enumerate(_decompose(block, x, app, substrate))
        )

        node_solution: dict[str, dict[str, float]] = {}
        for (q, s), i in block.nodes.items():
            if x[i] > POSITIVE:
                node_solution.setdefault(q, {})[s] = float(x[i])
        flow_solution: dict[str, dict[str, float]] = {}
        for (link, tail, head), i in block.flows.items():
            if x[i] > POSITIVE:
                flow_solution.setdefault(link, {})[f"{tail}>{head}"] = float(x[i])

        planned.append(
            PlanAggregate(
                app=aggregate.app,
                origin=aggregate.origin,
                expected_demand=aggregate.expected_demand,
                ci_low=aggregate.ci_low,
                ci_high=aggregate.ci_high,
                psi=aggregate.psi,
                allocated=float(x[block.root_index]),
                rejected_quantiles=tuple(float(x[i]) for i in block.quantiles),
                node_solution=node_solution,
                flow_solution=flow_solution,
                templates=templates,
            )
        )
    return Plan(
        aggregates=tuple(planned),
        objective=solution.objective,
        quantiles=quantiles,
        history_slots=history_slots,
    )
