import time
from dataclasses import dataclass
from typing import Iterable

from config import logging_configurator
from engine.embedders import Embedder, GreedyEmbedder, SearchBudgetExceeded
from engine.result import RunResult
from engine.state import Decision, EngineState, PlanResidual, Reason
from model.application import Application, is_forbidden
from model.embedding import Embedding
from model.ledger import EPS, LoadLedger
from model.loads import ElementLoads, cost_rate, scale
from model.problem.exception import ValidationProblem
from model.request import Request, RequestStatus
from model.substrate import SubstrateNetwork
from planner.plan import EMPTY_PLAN, Plan
from workload.trace import Trace

LOGGER = logging_configurator.logger(__name__)


@dataclass(frozen=True)
class PlanChoice:
    template_id: str
    embedding: Embedding
    loads: ElementLoads
    planned: bool
    fits: bool


class OliveEngine:
    """
    Online embedding driven by an offline plan. Every arrival is tried, in this order: a plan
    template with enough residual, the same template after preempting borrowers, a template with
    any positive residual whose embedding fits the substrate (borrowing), the fallback embedder.
    Requests nothing accepts are rejected.
    """

    def __init__(
        self,
        substrate: SubstrateNetwork,
        applications: Iterable[Application],
        plan: Plan = EMPTY_PLAN,
        fallback: Embedder | None = None,
        saturation_short_circuit: bool = False,
        name: str = "OLIVE",
        verify: bool = True,
    ) -> None:
        self.substrate = substrate
        self.applications = {app.id: app for app in applications}
        for app in self.applications.values():
            app.check_efficiency(substrate)
        self.plan = plan
        self.fallback = fallback or GreedyEmbedder(substrate)
        self.saturation_short_circuit = saturation_short_circuit
        self.name = name
        self.verify = verify

    def new_state(self) -> EngineState:
        return EngineState(
            ledger=LoadLedger(self.substrate),
            residual=PlanResidual(self.plan, self.applications, self.substrate),
        )

    def run(self, trace: Trace, start: int | None = None, end: int | None = None) -> RunResult:
        start = trace.test_start if start is None else start
        end = trace.horizon if end is None else end
        unknown = sorted({r.app for r in trace.requests} - set(self.applications))
        if unknown:
            raise ValidationProblem(detail=f"Trace uses applications {unknown} that are not defined.")

        state = self.new_state()
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

    def step(self, state: EngineState, t: int, arrivals: Iterable[Request]) -> None:
        self.release(state, t)
        for request in arrivals:
            self.process(state, request, t)
        state.ledger.snapshot(t)
        if self.verify:
            state.ledger.verify(t)
            state.residual.verify(t)
        LOGGER.debug("Processed slot", extra={"slot": t, "active": len(state.ledger)})

    def release(self, state: EngineState, t: int) -> list[int]:
        released = []
        for allocation in state.ledger.release_departures(t):
            request = allocation.request
            state.move(request.id, RequestStatus.DEPARTED)
            if request.id in state.planned:
                state.residual.restore(state.planned[request.id], request.size)
            released.append(request.id)
        return released

    def process(self, state: EngineState, request: Request, t: int) -> Decision:
        app = self.applications[request.app]
        if self.saturation_short_circuit and self._saturated(state.ledger, request, app):
            return self.reject(state, request, t, Reason.SATURATED)

        choice = self.planned_candidate(state, request)
        if choice is not None:
            if choice.fits or self.preempt(state, request, choice.loads, t):
                return self.allocate(
                    state, request, choice.embedding, choice.loads, t, Decision.PLANNED, choice.template_id
                )

        borrowed = self.borrow_candidate(state, request)
        if borrowed is not None:
            return self.allocate(state, request, borrowed.embedding, borrowed.loads, t, Decision.BORROWED)

        try:
            candidate = self.fallback(request, app, state.ledger)
        except SearchBudgetExceeded as exc:
            state.timeouts.add(request.id)
            LOGGER.warning(
                "Embedding search gave up", extra={"request_id": request.id, "evaluations": exc.evaluations}
            )
            return self.reject(state, request, t, Reason.SEARCH_BUDGET)
        if candidate is not None and state.ledger.fits(candidate.loads):
            return self.allocate(state, request, candidate.embedding, candidate.loads, t, Decision.GREEDY)
        return self.reject(state, request, t, Reason.NO_CAPACITY)

    def plan_embed(self, state: EngineState, request: Request) -> PlanChoice | None:
        """The plan's answer alone: a sufficient template, else a borrowable one, else nothing."""
        return self.planned_candidate(state, request) or self.borrow_candidate(state, request)

    def planned_candidate(self, state: EngineState, request: Request) -> PlanChoice | None:
        """
        Best fit among templates whose residual covers the request, preferring those that also fit
        the substrate right now; ties go to the earlier template.
        """
        sufficient = []
        for position, template in enumerate(state.residual.templates_for(request)):
            capacity = state.residual.capacity(template.template.id)
            if capacity + EPS >= request.size:
                loads = scale(template.unit_loads, request.size)
                sufficient.append((not state.ledger.fits(loads), capacity, position, template, loads))
        if not sufficient:
            return None
        misfit, _, _, template, loads = min(sufficient, key=lambda s: s[:3])
        return PlanChoice(
            template_id=template.template.id,
            embedding=template.template.embedding,
            loads=loads,
            planned=True,
            fits=not misfit,
        )

    def borrow_candidate(self, state: EngineState, request: Request) -> PlanChoice | None:
        """The template with the largest positive residual whose embedding fits the substrate."""
        borrowable = []
        for position, template in enumerate(state.residual.templates_for(request)):
            remaining = state.residual.remaining(template.template.id)
            if remaining <= EPS:
                continue
            loads = scale(template.unit_loads, request.size)
            if state.ledger.fits(loads):
                borrowable.append((-remaining, position, template, loads))
        if not borrowable:
            return None
        _, _, template, loads = min(borrowable, key=lambda b: b[:2])
        return PlanChoice(
            template_id=template.template.id,
            embedding=template.template.embedding,
            loads=loads,
            planned=False,
            fits=True,
        )

    def preempt(self, state: EngineState, request: Request, loads: ElementLoads, t: int) -> bool:
        """
        Free room for a planned embedding by evicting non-planned allocations that load the
        overloaded elements, largest contribution first. Either enough is freed and the victims are
        evicted, or nothing is touched.
        """
        ledger = state.ledger
        load, capacity = ledger.load, self.substrate.capacities
        deficit = [i for i, amount in loads.items() if load[i] + amount > capacity[i]]
        if not deficit:
            return True

        def enough(victims: list[int]) -> bool:
            after = ledger.load_without(victims)
            return all(after[i] + amount <= capacity[i] for i, amount in loads.items())

        suspects = {rid for i in deficit for rid in ledger.contributors(i) if rid not in state.planned}
        score = {rid: sum(ledger.allocation(rid).loads.get(i, 0.0) for i in deficit) for rid in suspects}
        victims: list[int] = []
        for rid in sorted(suspects, key=lambda v: (-score[v], v)):
            victims.append(rid)
            if enough(victims):
                break
        else:
            return False

        for rid in reversed(list(victims)):
            trimmed = [v for v in victims if v != rid]
            if enough(trimmed):
                victims = trimmed

        for rid in victims:
            allocation = ledger.remove(rid)
            state.move(rid, RequestStatus.PREEMPTED)
            state.decisions[rid] = Decision.PREEMPTED
            state.events.record(
                t,
                rid,
                Decision.PREEMPTED,
                allocation.embedding,
                cost_delta=-cost_rate(allocation.loads, self.substrate),
                reason=f"{Reason.FREED_FOR_PLAN.value}:{request.id}",
            )
        return True

    def allocate(
        self,
        state: EngineState,
        request: Request,
        embedding: Embedding,
        loads: ElementLoads,
        t: int,
        decision: Decision,
        template_id: str | None = None,
    ) -> Decision:
        planned = decision == Decision.PLANNED
        bound = embedding.bind(request.id, planned=planned)
        state.ledger.add(request, bound, loads, t)
        state.move(request.id, RequestStatus.ALLOCATED)
        state.done.add(request.id)
        state.decisions[request.id] = decision
        if planned:
            state.planned[request.id] = template_id
            state.residual.consume(template_id, request.size)
        state.events.record(t, request.id, decision, bound, cost_delta=cost_rate(loads, self.substrate))
        return decision

    def reject(self, state: EngineState, request: Request, t: int, reason: Reason) -> Decision:
        state.move(request.id, RequestStatus.REJECTED)
        state.decisions[request.id] = Decision.REJECTED
        state.events.record(t, request.id, Decision.REJECTED, reason=reason.value)
        return Decision.REJECTED

    def _saturated(self, ledger: LoadLedger, request: Request, app: Application) -> bool:
        """True when no substrate node can take all VNFs of the request at once."""
        for node in self.substrate.nodes:
            etas = [app.eta(q, node.id) for q in app.vnfs]
            if any(is_forbidden(eta) for eta in etas):
                continue
            demand = 0.0
            for q, eta in zip(app.vnfs, etas):
                demand += request.size * app.size_of(q) * eta
            if ledger.admits(self.substrate.index[node.id], demand):
                return False
        return True
