import networkx as nx
import numpy as np
import pytest

from engine.embedders import FullEmbedder, GreedyEmbedder, SearchBudgetExceeded
from model.application import FORBIDDEN
from model.embedding import validate_for_request
from model.ledger import LoadLedger
from tests.helpers import chain_app, random_substrate, request, single_vnf_app, triangle_substrate, two_node_substrate
from unit.utils import given_an_allocation

SPLIT_FAVOURING = triangle_substrate({"A": 50, "B": 1, "C": 5}, capacities={"B": 500})
TWO_VNFS = chain_app(app_id="app", sizes=(50, 50), link_sizes=(1, 1))


def oracle_cost(substrate, app, r) -> float | None:
    """Cheapest collocated embedding found by trying every host and every simple path to it."""
    node_load = r.size * sum(app.size_of(q) for q in app.vnfs)
    link_load = r.size * sum(link.size for link in app.root_links)
    best = None
    for node in substrate.nodes:
        if node_load > node.capacity:
            continue
        if node.id == r.origin:
            paths = [[r.origin]]
        else:
            paths = nx.all_simple_paths(substrate.graph, r.origin, node.id)
        for path in paths:
            links = [substrate.link_between(u, v) for u, v in zip(path, path[1:])]
            if any(link_load > link.capacity for link in links):
                continue
            cost = node_load * node.unit_cost + sum(link_load * link.unit_cost for link in links)
            best = cost if best is None else min(best, cost)
    return best


def test_should_collocate_on_the_cheap_neighbour(substrate, app):
    candidate = GreedyEmbedder(substrate)(request(size=10), app, LoadLedger(substrate))
    assert candidate.embedding.node_map == {"u": "A", "f1": "B"}
    assert candidate.cost == 1000


def test_should_leave_links_between_collocated_vnfs_unused(substrate):
    candidate = GreedyEmbedder(substrate)(request(size=1), TWO_VNFS, LoadLedger(substrate))
    assert candidate.embedding.paths == {"u-f1": ("A", "B"), "f1-f2": ("B",)}
    validate_for_request(candidate.embedding, request(size=1), TWO_VNFS, substrate)


def test_should_skip_hosts_without_residual_capacity(app):
    substrate = two_node_substrate(b_capacity=700)
    ledger = LoadLedger(substrate)
    first = GreedyEmbedder(substrate)(request(0, size=10), app, ledger)
    given_an_allocation(ledger, request(0, size=10), app, first.embedding)
    candidate = GreedyEmbedder(substrate)(request(1, size=10), app, ledger)
    assert candidate.embedding.node_map["f1"] == "A", "B keeps only 200 CU"


def test_should_find_nothing_when_every_host_is_full(app):
    substrate = two_node_substrate(a_capacity=100, b_capacity=100)
    assert GreedyEmbedder(substrate)(request(size=10), app, LoadLedger(substrate)) is None


def test_should_avoid_forbidden_hosts(substrate):
    app = single_vnf_app(efficiency=(("f1", "B", FORBIDDEN),))
    candidate = GreedyEmbedder(substrate)(request(size=10), app, LoadLedger(substrate))
    assert candidate.embedding.node_map["f1"] == "A"


@pytest.mark.parametrize("seed", range(100))
def test_should_match_an_exhaustive_collocated_search(seed):
    rng = np.random.default_rng(seed)
    substrate = random_substrate(rng)
    vnfs = int(rng.integers(1, 4))
    app = chain_app(
        app_id="app", sizes=tuple(rng.uniform(5, 60, size=vnfs)), link_sizes=tuple(rng.uniform(1, 40, size=vnfs))
    )
    r = request(origin="n0", size=float(rng.uniform(1, 30)))

    candidate = GreedyEmbedder(substrate)(r, app, LoadLedger(substrate))

    expected = oracle_cost(substrate, app, r)
    if expected is None:
        assert candidate is None
    else:
        assert candidate.cost == pytest.approx(expected, rel=1e-12)
        assert set(candidate.embedding.node_map.values()) - {r.origin} <= {candidate.embedding.node_map["f1"]}


def test_should_split_vnfs_when_no_single_host_fits():
    ledger = LoadLedger(SPLIT_FAVOURING)
    greedy = GreedyEmbedder(SPLIT_FAVOURING)(request(size=10), TWO_VNFS, ledger)
    full = FullEmbedder(SPLIT_FAVOURING)(request(size=10), TWO_VNFS, ledger)

    assert greedy.cost == pytest.approx(5010), "both VNFs on C, the only host with room for 1000 CU"
    assert full.cost == pytest.approx(3020)
    assert full.embedding.node_map == {"u": "A", "f1": "B", "f2": "C"}
    assert full.embedding.paths == {"u-f1": ("A", "B"), "f1-f2": ("B", "C")}


def test_should_never_cost_more_than_greedy():
    rng = np.random.default_rng(99)
    for _ in range(10):
        substrate = random_substrate(rng)
        r = request(origin="n0", size=float(rng.uniform(1, 10)))
        ledger = LoadLedger(substrate)
        greedy = GreedyEmbedder(substrate)(r, TWO_VNFS, ledger)
        full = FullEmbedder(substrate)(r, TWO_VNFS, ledger)
        if greedy is not None:
            assert full.cost <= greedy.cost + 1e-9
            validate_for_request(full.embedding, r, TWO_VNFS, substrate)


def test_should_give_up_beyond_the_search_budget():
    forbidden = (("f1", "B", FORBIDDEN), ("f1", "C", FORBIDDEN), ("f2", "A", FORBIDDEN))
    app = chain_app(app_id="app", sizes=(50, 50), efficiency=forbidden)
    substrate = triangle_substrate({"A": 1, "B": 1, "C": 1})
    with pytest.raises(SearchBudgetExceeded):
        FullEmbedder(substrate, budget=1)(request(size=1), app, LoadLedger(substrate))
