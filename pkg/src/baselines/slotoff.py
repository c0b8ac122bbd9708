import time
from collections import defaultdict
from typing import Iterable

from config import logging_configurator
from engine.result import RunResult
from engine.state import Decision, EngineState, PlanResidual, Reason
from model.application import Application
from model.ledger import EPS, Allocation, LoadLedger
from model.loads import cost_rate, scale
from model.problem.exception import ValidationProblem
from model.request import Request, RequestStatus
from model.substrate import SubstrateNetwork
from planner.aggregation import AggregateRequest
from planner.config import PlanConfig
from planner.decomposition import extract_templates
from planner.plan import EMPTY_PLAN, Plan
from planner.psi import default_psi
from planner.pvne import build_pvne
from planner.solver import LPSolver, solve_lp
from workload.trace import Trace

LOGGER = logging_configurator.logger(__name__)


class SlotOffEngine:
    """
    Re-plans every slot from scratch: the active requests of the slot are aggregated by
    (application, origin) with their actual demand, the planning LP is solved for them alone and
    its templates are handed out first come first served. A request that gets nothing in its
    arrival slot is rejected for good; an ongoing request that gets nothing later is preempted.
    Ongoing requests may move to a different embedding every slot, at no extra cost.
    """

    def __init__(
        self,
        substrate: SubstrateNetwork,
        applications: Iterable[Application],
        config: PlanConfig = PlanConfig(),
        solver: LPSolver | None = None,
        name: str = "SLOTOFF",
        verify: bool = True,
    ) -> None:
        self.substrate = substrate
        self.applications = {app.id: app for app in applications}
        for app in self.applications.values():
            app.check_efficiency(substrate)
        self.config = config
        self.solver = solver
        self.name = name
        self.verify = verify

    def run(self, trace: Trace, start: int | None = None, end: int | None = None) -> RunResult:
        start = trace.test_start if start is None else start
        end = trace.horizon if end is None else end
        unknown = sorted({r.app for r in trace.requests} - set(self.applications))
        if unknown:
            raise ValidationProblem(detail=f"Trace uses applications {unknown} that are not defined.")

        state = EngineState(
            ledger=LoadLedger(self.substrate),
            residual=PlanResidual(EMPTY_PLAN, self.applications, self.substrate),
        )
        started = time.perf_counter()
        for t in range(start, end):
            self.step(state, t, trace.by_slot.get(t, ()))
        runtime_ms = (time.perf_counter() - started) * 1000

        result = RunResult(
            algorithm=self.name,
            substrate=self.substrate,
            requests=tuple(r for r in trace.requests if start <= r.arrival < end),
            state=state,
            start=start,
            end=end,
            runtime_ms=runtime_ms,
        )
        LOGGER.info("Finished run", extra=result.log_record())
        return result

    def slot_plan(self, active: list[Request]) -> Plan:
        """Plan for exactly the given requests, each aggregate's demand being the sum of its sizes."""
        grouped: dict[tuple[str, str], list[Request]] = defaultdict(list)
        for request in active:
            grouped[request.key].append(request)
        aggregates = []
        for app, origin in sorted(grouped):
            members = grouped[(app, origin)]
            demand = sum(r.size for r in members)
            psi = self.config.psi
            if psi is None:
                psi = default_psi(self.applications[app], self.substrate)
            aggregates.append(
                AggregateRequest(
                    app=app,
                    origin=origin,
                    members=tuple(r.id for r in members),
                    series=(demand,),
                    expected_demand=demand,
                    ci_low=demand,
                    ci_high=demand,
                    psi=psi,
                )
            )
        aggregates = tuple(aggregates)
        model = build_pvne(self.substrate, aggregates, self.applications, self.config)
        solution = solve_lp(model, self.solver)
        return extract_templates(model, solution, aggregates, self.applications, self.substrate, self.config.quantiles)

    def step(self, state: EngineState, t: int, arrivals: Iterable[Request]) -> None:
        ledger = state.ledger
        for allocation in ledger.release_departures(t):
            state.move(allocation.request.id, RequestStatus.DEPARTED)

        arrivals = list(arrivals)
        ongoing = [a.request for a in ledger.allocations.values()]
        active = sorted([*ongoing, *arrivals], key=lambda r: (r.arrival, r.id))
        if active:
            previous = {a.request.id: a for a in ledger.allocations.values()}
            residual = PlanResidual(self.slot_plan(active), self.applications, self.substrate)
            ledger.clear()
            for request in active:
                self._assign(state, residual, request, previous.get(request.id), t)

        ledger.snapshot(t)
        if self.verify:
            ledger.verify(t)
        LOGGER.debug("Processed slot", extra={"slot": t, "active": len(ledger)})

    def _assign(
        self, state: EngineState, residual: PlanResidual, request: Request, previous: Allocation | None, t: int
    ) -> None:
        ledger = state.ledger
        choice = None
        sufficient, partial = [], []
        for position, template in enumerate(residual.templates_for(request)):
            loads = scale(template.unit_loads, request.size)
            if not ledger.fits(loads):
                continue
            capacity = residual.capacity(template.template.id)
            if capacity + EPS >= request.size:
                sufficient.append((capacity, position, template, loads))
            elif residual.remaining(template.template.id) > EPS:
                partial.append((-capacity, position, template, loads))
        if sufficient:
            choice = min(sufficient, key=lambda c: c[:2])
        elif partial:
            choice = min(partial, key=lambda c: c[:2])

        if choice is None:
            if previous is None:
                state.move(request.id, RequestStatus.REJECTED)
                state.decisions[request.id] = Decision.REJECTED
                state.events.record(t, request.id, Decision.REJECTED, reason=Reason.UNASSIGNABLE.value)
            else:
                state.move(request.id, RequestStatus.PREEMPTED)
                state.decisions[request.id] = Decision.PREEMPTED
                state.events.record(
                    t,
                    request.id,
                    Decision.PREEMPTED,
                    previous.embedding,
                    cost_delta=-cost_rate(previous.loads, self.substrate),
                    reason=Reason.LOST_ASSIGNMENT.value,
                )
            return

        _, _, template, loads = choice
        residual.drain(template.template.id, request.size)
        embedding = template.template.embedding.bind(request.id, planned=False)
        ledger.add(request, embedding, loads, t)
        if previous is None:
            state.move(request.id, RequestStatus.ALLOCATED)
            state.done.add(request.id)
            state.decisions[request.id] = Decision.SLOTOFF_ASSIGNED
            state.events.record(
                t, request.id, Decision.SLOTOFF_ASSIGNED, embedding, cost_delta=cost_rate(loads, self.substrate)
            )
        elif (previous.embedding.node_map, previous.embedding.paths) != (embedding.node_map, embedding.paths):
            state.events.record(
                t,
                request.id,
                Decision.SLOTOFF_ASSIGNED,
                embedding,
                cost_delta=cost_rate(loads, self.substrate) - cost_rate(previous.loads, self.substrate),
            )
