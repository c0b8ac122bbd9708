from typing import Iterable

from engine.olive import OliveEngine
from engine.result import RunResult
from model.application import Application
from model.embedding import Embedding
from model.ledger import Allocation, LoadLedger
from model.loads import request_loads
from model.request import Request
from model.substrate import SubstrateNetwork
from planner.aggregation import AggregateRequest
from planner.config import PlanConfig
from planner.plan import EMPTY_PLAN, Plan
from planner.pvne import LPModel, build_pvne
from planner.solver import LPSolution, solve_lp
from tests.helpers import trace_of


def given_an_allocation(
    ledger: LoadLedger, request: Request, app: Application, embedding: Embedding, slot: int | None = None
) -> Allocation:
    loads = request_loads(request, app, embedding, ledger.substrate)
    return ledger.add(request, embedding, loads, request.arrival if slot is None else slot)


def given_an_aggregate(app: str = "app", origin: str = "A", demand: float = 10.0, psi: float = 2550.0):
    return AggregateRequest(app=app, origin=origin, expected_demand=demand, psi=psi)


def given_a_solved_model(
    substrate: SubstrateNetwork,
    aggregates: Iterable[AggregateRequest],
    applications: Iterable[Application],
    config: PlanConfig = PlanConfig(),
) -> tuple[LPModel, LPSolution]:
    model = build_pvne(substrate, tuple(aggregates), {a.id: a for a in applications}, config)
    return model, solve_lp(model)


def given_a_run(
    substrate: SubstrateNetwork,
    applications: Iterable[Application],
    *requests: Request,
    plan: Plan = EMPTY_PLAN,
    **engine_options,
) -> RunResult:
    return OliveEngine(substrate, list(applications), plan, **engine_options).run(trace_of(*requests))
