import numpy as np
import pytest

from baselines.runners import Algorithm, BaselineKind, run_olive, simulate
from baselines.slotoff import SlotOffEngine
from engine.replay import assert_same_state, replay
from engine.state import Decision
from model.application import FORBIDDEN
from model.problem.exception import MissingArtifactProblem, ValidationProblem
from model.request import RequestStatus
from planner.config import PlanConfig
from planner.plan import EMPTY_PLAN
from tests.helpers import one_template_plan, request, single_vnf_app, trace_of, triangle_substrate, two_node_substrate

A_FORBIDDEN = single_vnf_app(efficiency=(("f1", "A", FORBIDDEN),))


@pytest.mark.parametrize("text, algorithm", [("olive", Algorithm.OLIVE), (" QuickG ", Algorithm.QUICKG)])
def test_should_parse_algorithm_names_loosely(text, algorithm):
    assert Algorithm.parse(text) == algorithm


def test_should_refuse_an_unknown_algorithm():
    with pytest.raises(ValidationProblem) as problem:
        Algorithm.parse("annealing")
    assert problem.value.errors == [{"allowed": ["OLIVE", "QUICKG", "FULLG", "SLOTOFF"]}]


def test_should_not_treat_olive_as_a_baseline():
    with pytest.raises(ValidationProblem):
        BaselineKind(algorithm=Algorithm.OLIVE)


def test_should_need_a_plan_for_olive(substrate, app):
    with pytest.raises(MissingArtifactProblem):
        run_olive(substrate, [app], trace_of(request()), None)


@pytest.mark.parametrize("algorithm", list(Algorithm))
def test_should_name_every_run_after_its_algorithm(substrate, app, algorithm):
    result = simulate(algorithm, substrate, [app], trace_of(request(size=1)), plan=EMPTY_PLAN)
    assert result.algorithm == algorithm.value
    assert result.decision(0).accepts


def test_should_reject_what_the_slot_plan_cannot_serve():
    substrate = two_node_substrate(b_capacity=250)
    engine = SlotOffEngine(substrate, [A_FORBIDDEN], PlanConfig(psi=1000))
    result = engine.run(trace_of(request(0, size=5), request(1, size=5)))

    assert result.decision(0) == Decision.SLOTOFF_ASSIGNED
    assert result.decision(1) == Decision.REJECTED
    assert result.events.events[-1].reason == "unassignable"
    assert result.ledger.allocation(0).embedding.node_map["f1"] == "B"


def test_should_move_and_then_drop_an_ongoing_request(mocker, substrate, app):
    engine = SlotOffEngine(substrate, [app])
    mocker.patch.object(
        engine, "slot_plan", side_effect=[one_template_plan(host="B"), one_template_plan(host="A"), EMPTY_PLAN]
    )
    trace = trace_of(request(0, size=10, duration=3))

    result = engine.run(trace)

    assert [(e.slot, e.decision.value, e.cost_delta, e.reason) for e in result.events] == [
        (0, "slotoff-assigned", 1000, ""),
        (1, "slotoff-assigned", 24000, ""),
        (2, "preempted", -25000, "lost-assignment"),
    ]
    assert result.status(0) == RequestStatus.PREEMPTED
    assert_same_state(result.ledger, replay(substrate, [app], trace, result.events, end=result.end))


def test_should_keep_slotoff_within_capacity():
    substrate = triangle_substrate({"A": 50, "B": 1, "C": 2}, capacities={"B": 1000, "C": 1500})
    app = single_vnf_app()
    rng = np.random.default_rng(13)
    requests = [
        request(i, size=float(rng.uniform(1, 6)), arrival=int(rng.integers(0, 12)), duration=int(rng.integers(1, 5)))
        for i in range(40)
    ]
    result = SlotOffEngine(substrate, [app], PlanConfig(quantiles=4)).run(trace_of(*requests))

    _, loads = result.history()
    assert np.all(loads <= substrate.capacities * (1 + 1e-9))
    assert all(result.decision(r.id) is not None for r in requests)
