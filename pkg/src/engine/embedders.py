from dataclasses import dataclass
from typing import Protocol

import networkx as nx

from model.application import Application, is_forbidden
from model.embedding import Embedding
from model.ledger import LoadLedger
from model.loads import ElementLoads, cost_rate
from model.request import Request
from model.substrate import SubstrateNetwork


@dataclass(frozen=True)
class Candidate:
    embedding: Embedding
    loads: ElementLoads
    cost: float


class SearchBudgetExceeded(Exception):
    def __init__(self, evaluations: int) -> None:
        super().__init__(f"Search budget exhausted after {evaluations} evaluations.")
        self.evaluations = evaluations


class Embedder(Protocol):
    name: str

    def __call__(self, request: Request, app: Application, ledger: LoadLedger) -> Candidate | None: ...


def _link_demands(
    request: Request, app: Application, virtual_links, substrate: SubstrateNetwork
) -> dict[str, float | None]:
    """Combined load every substrate link would carry if all the given virtual links used it; None marks forbidden."""
    demands: dict[str, float | None] = {}
    for link in substrate.links:
        total = 0.0
        for virtual in virtual_links:
            eta = app.eta(virtual.id, link.id)
            if is_forbidden(eta):
                total = None
                break
            total += request.size * virtual.size * eta
        demands[link.id] = total
    return demands


def _admissible_weight(demands: dict[str, float | None], ledger: LoadLedger, substrate: SubstrateNetwork):
    index, costs = substrate.index, substrate.unit_costs

    def weight(_u, _v, data) -> float | None:
        amount = demands[data["link"]]
        if amount is None or not ledger.admits(index[data["link"]], amount):
            return None
        return amount * costs[index[data["link"]]]

    return weight


class GreedyEmbedder:
    """
    Collocate every VNF on one substrate node w. The root-incident virtual links share one
    cost-weighted shortest path from the origin to w over links able to carry their combined load;
    links between collocated VNFs use nothing. The cheapest feasible w wins, ties by node id.
    """

    name = "greedy"

    def __init__(self, substrate: SubstrateNetwork) -> None:
        self.substrate = substrate

    def __call__(self, request: Request, app: Application, ledger: LoadLedger) -> Candidate | None:
        substrate = self.substrate
        demands = _link_demands(request, app, app.root_links, substrate)
        _, routes = nx.single_source_dijkstra(
            substrate.graph, request.origin, weight=_admissible_weight(demands, ledger, substrate)
        )

        best: Candidate | None = None
        for host in sorted(routes):
            node_load = 0.0
            for q in app.vnfs:
                eta = app.eta(q, host)
                if is_forbidden(eta):
                    node_load = None
                    break
                node_load += request.size * app.size_of(q) * eta
            if node_load is None or not ledger.admits(substrate.index[host], node_load):
                continue

            path = tuple(routes[host])
            loads: ElementLoads = {}
            if node_load > 0:
                loads[substrate.index[host]] = node_load
            for u, v in zip(path, path[1:]):
                link_id = substrate.link_between(u, v).id
                if demands[link_id] > 0:
                    loads[substrate.index[link_id]] = demands[link_id]
            cost = cost_rate(loads, substrate)
            if best is None or cost < best.cost:
                node_map = {app.root: request.origin} | {q: host for q in app.vnfs}
                paths = {
                    link.id: path if link.parent == app.root else (host,)
                    for link in app.links
                }
                best = Candidate(embedding=Embedding(node_map=node_map, paths=paths), loads=loads, cost=cost)
        return best


class FullEmbedder:
    """
    Exact search over node maps without the collocation restriction. VNFs are placed in
    topological order; each virtual link is routed right after its child is placed, along the
    cheapest path the tentative residual allows. Branches whose partial cost cannot beat the
    incumbent are cut; the collocated greedy answer seeds the incumbent.
    """

    name = "fullg"

    def __init__(self, substrate: SubstrateNetwork, budget: int = 1_000_000) -> None:
        self.substrate = substrate
        self.budget = budget
        self._greedy = GreedyEmbedder(substrate)

    def __call__(self, request: Request, app: Application, ledger: LoadLedger) -> Candidate | None:
        substrate = self.substrate
        index, costs = substrate.index, substrate.unit_costs
        best = self._greedy(request, app, ledger)
        evaluations = 0

        cheapest_node = {
            q: min(
                (
                    request.size * app.size_of(q) * app.eta(q, n.id) * n.unit_cost
                    for n in substrate.nodes
                    if not is_forbidden(app.eta(q, n.id))
                ),
                default=None,
            )
            for q in app.vnfs
        }
        if any(v is None for v in cheapest_node.values()):
            return best

        node_map: dict[str, str] = {app.root: request.origin}
        paths: dict[str, tuple[str, ...]] = {}
        # Tentative loads are kept as stacks of contributions so backtracking restores them exactly.
        tentative: dict[int, list[float]] = {}

        def held(i: int) -> float:
            return sum(tentative.get(i, ()))

        def fits(extra: ElementLoads) -> bool:
            return all(ledger.admits(i, held(i) + amount) for i, amount in extra.items())

        def route(link, source: str, target: str) -> tuple[tuple[str, ...], ElementLoads] | None:
            def weight(_u, _v, data) -> float | None:
                eta = app.eta(link.id, data["link"])
                if is_forbidden(eta):
                    return None
                amount = request.size * link.size * eta
                i = index[data["link"]]
                if not ledger.admits(i, held(i) + amount):
                    return None
                return amount * costs[i]

            try:
                _, hops = nx.single_source_dijkstra(substrate.graph, source, target, weight=weight)
            except nx.NetworkXNoPath:
                return None
            loads: ElementLoads = {}
            for u, v in zip(hops, hops[1:]):
                link_id = substrate.link_between(u, v).id
                amount = request.size * link.size * app.eta(link.id, link_id)
                if amount > 0:
                    loads[index[link_id]] = amount
            return tuple(hops), loads

        def push(extra: ElementLoads) -> None:
            for i, amount in extra.items():
                tentative.setdefault(i, []).append(amount)

        def pop(extra: ElementLoads) -> None:
            for i in extra:
                tentative[i].pop()
                if not tentative[i]:
                    del tentative[i]

        def search(position: int, cost: float) -> None:
            nonlocal best, evaluations
            if position == len(app.vnfs):
                loads = {i: sum(stack) for i, stack in tentative.items()}
                total = cost_rate(loads, substrate)
                if best is None or total < best.cost:
                    embedding = Embedding(node_map=dict(node_map), paths=dict(paths))
                    best = Candidate(embedding=embedding, loads=loads, cost=total)
                return
            q = app.vnfs[position]
            link = app.parent_link[q]
            bound = sum(cheapest_node[r] for r in app.vnfs[position + 1 :])
            ranked = sorted(
                (n for n in substrate.nodes if not is_forbidden(app.eta(q, n.id))),
                key=lambda n: (request.size * app.size_of(q) * app.eta(q, n.id) * n.unit_cost, n.id),
            )
            for host in ranked:
                evaluations += 1
                if evaluations > self.budget:
                    raise SearchBudgetExceeded(evaluations)
                node_cost = request.size * app.size_of(q) * app.eta(q, host.id) * host.unit_cost
                if best is not None and cost + node_cost + bound >= best.cost:
                    break
                node_amount = request.size * app.size_of(q) * app.eta(q, host.id)
                node_extra = {index[host.id]: node_amount} if node_amount > 0 else {}
                if not fits(node_extra):
                    continue
                push(node_extra)
                routed = route(link, node_map[link.parent], host.id)
                if routed is not None:
                    hops, link_extra = routed
                    link_cost = cost_rate(link_extra, substrate)
                    push(link_extra)
                    node_map[q] = host.id
                    paths[link.id] = hops
                    search(position + 1, cost + node_cost + link_cost)
                    del node_map[q], paths[link.id]
                    pop(link_extra)
                pop(node_extra)

        search(0, 0.0)
        return best
