import numpy as np
import pytest

from model.problem.exception import DecompositionProblem
from planner.config import PlanConfig
from planner.decomposition import extract_templates
from planner.planning import build_plan
from planner.pvne import build_pvne
from planner.solver import LPSolution
from tests.helpers import chain_app, request, triangle_substrate
from unit.utils import given_a_solved_model, given_an_aggregate
from workload.io import load_plan, write_json


def given_templates(substrate, aggregates, applications, config=PlanConfig()):
    model, solution = given_a_solved_model(substrate, aggregates, applications, config)
    by_id = {a.id: a for a in applications}
    return model, solution, extract_templates(model, solution, tuple(aggregates), by_id, substrate, config.quantiles)


def test_should_extract_a_single_template_from_an_integral_solution(substrate, app):
    _, _, plan = given_templates(substrate, [given_an_aggregate()], [app])
    (aggregate,) = plan.aggregates
    (template,) = aggregate.templates
    assert template.id == "app@A#0"
    assert template.weight == pytest.approx(1)
    assert template.embedding.node_map == {"u": "A", "f1": "B"}
    assert template.embedding.paths == {"u-f1": ("A", "B")}
    assert template.embedding.planned


def test_should_split_an_aggregate_over_the_capacity_of_the_cheapest_host(app):
    substrate = triangle_substrate({"A": 50, "B": 1, "C": 2}, capacities={"B": 300})
    _, _, plan = given_templates(substrate, [given_an_aggregate()], [app])
    templates = plan.aggregates[0].templates
    assert [t.embedding.node_map["f1"] for t in templates] == ["B", "C"]
    assert [t.weight for t in templates] == pytest.approx([0.6, 0.4])
    assert [t.embedding.paths["u-f1"] for t in templates] == [("A", "B"), ("A", "C")]


def test_should_reconstruct_the_node_solution_from_the_templates(app):
    substrate = triangle_substrate({"A": 50, "B": 1, "C": 2}, capacities={"B": 300})
    _, _, plan = given_templates(substrate, [given_an_aggregate()], [app])
    aggregate = plan.aggregates[0]

    rebuilt: dict[tuple[str, str], float] = {}
    for template in aggregate.templates:
        for q, host in template.embedding.node_map.items():
            rebuilt[(q, host)] = rebuilt.get((q, host), 0.0) + template.weight
    expected = {(q, s): v for q, hosts in aggregate.node_solution.items() for s, v in hosts.items()}
    assert rebuilt == pytest.approx(expected)
    assert aggregate.template_weight == pytest.approx(aggregate.allocated)


def test_should_decompose_a_chain_across_several_hops():
    substrate = triangle_substrate({"A": 50, "B": 5, "C": 1}, capacities={"C": 300})
    app = chain_app(app_id="app", sizes=(10, 20))
    _, _, plan = given_templates(substrate, [given_an_aggregate(psi=10_000)], [app])
    aggregate = plan.aggregates[0]
    assert aggregate.template_weight == pytest.approx(aggregate.allocated)
    for template in aggregate.templates:
        assert template.embedding.node_map["u"] == "A"
        for link in app.links:
            hops = template.embedding.paths[link.id]
            assert hops[0] == template.embedding.node_map[link.parent]
            assert hops[-1] == template.embedding.node_map[link.child]


def test_should_fail_on_mass_no_path_reaches(substrate, app):
    model = build_pvne(substrate, (given_an_aggregate(),), {app.id: app}, PlanConfig())
    x = np.zeros(model.size)
    x[model.index["y[a0][u][A]"]] = 1
    x[model.index["y[a0][f1][B]"]] = 1
    solution = LPSolution(x=x, objective=model.objective(x), status="optimal", solve_ms=0.0)
    with pytest.raises(DecompositionProblem) as problem:
        extract_templates(model, solution, (given_an_aggregate(),), {app.id: app}, substrate, 10)
    assert problem.value.exit_code == 2


def test_should_keep_aggregates_without_demand_in_the_plan(substrate, app):
    _, _, plan = given_templates(substrate, [given_an_aggregate(demand=0.0)], [app])
    assert plan.aggregates[0].templates == ()
    assert plan.is_empty


def test_should_plan_from_a_history(tmp_path, substrate, app):
    history = [request(0, size=10, arrival=0, duration=10)]
    config = PlanConfig(resamples=100, quantiles=4, seed=1)
    lp_path = tmp_path / "plan.lp"

    plan = build_plan(substrate, (app,), history, config, history_slots=10, lp_export=lp_path)

    aggregate = plan.aggregate("app", "A")
    assert aggregate.expected_demand == pytest.approx(10), "a constant series is its own percentile"
    assert aggregate.psi == pytest.approx(2550)
    assert [t.embedding.node_map["f1"] for t in aggregate.templates] == ["B"]
    assert plan.objective == pytest.approx(1000)
    assert (plan.quantiles, plan.history_slots) == (4, 10)
    assert "Minimize" in lp_path.read_text()

    loaded = load_plan(write_json(plan, tmp_path / "plan.json"))
    assert loaded.model_dump_json() == plan.model_dump_json()
