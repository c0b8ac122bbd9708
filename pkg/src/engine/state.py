from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import pandas as pd

from model.application import Application
from model.embedding import Embedding
from model.ledger import EPS, LoadLedger
from model.loads import ElementLoads, unit_loads
from model.problem.exception import InvariantViolationProblem
from model.request import Request, RequestStatus, advance
from model.substrate import SubstrateNetwork
from planner.plan import Plan, Template

EVENT_COLUMNS = ["slot", "request_id", "decision", "node_map", "paths", "cost_delta", "reason"]


class Decision(str, Enum):
    PLANNED = "planned"
    BORROWED = "borrowed"
    GREEDY = "greedy"
    REJECTED = "rejected"
    PREEMPTED = "preempted"
    SLOTOFF_ASSIGNED = "slotoff-assigned"

    @property
    def accepts(self) -> bool:
        return self in (Decision.PLANNED, Decision.BORROWED, Decision.GREEDY, Decision.SLOTOFF_ASSIGNED)


class Reason(str, Enum):
    NO_CAPACITY = "no-feasible-embedding"
    SATURATED = "saturated"
    SEARCH_BUDGET = "search-budget"
    UNASSIGNABLE = "unassignable"
    FREED_FOR_PLAN = "freed-for-planned"
    LOST_ASSIGNMENT = "lost-assignment"


@dataclass(frozen=True)
class Event:
    slot: int
    request_id: int
    decision: Decision
    node_map: str = ""
    paths: str = ""
    cost_delta: float = 0.0
    reason: str = ""


@dataclass
class EventLog:
    events: list[Event] = field(default_factory=list)

    def record(
        self,
        slot: int,
        request_id: int,
        decision: Decision,
        embedding: Embedding | None = None,
        cost_delta: float = 0.0,
        reason: str = "",
    ) -> Event:
        event = Event(
            slot=slot,
            request_id=request_id,
            decision=decision,
            node_map=embedding.describe_nodes() if embedding else "",
            paths=embedding.describe_paths() if embedding else "",
            cost_delta=cost_delta,
            reason=reason,
        )
        self.events.append(event)
        return event

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def to_frame(self) -> pd.DataFrame:
        rows = [(e.slot, e.request_id, e.decision.value, e.node_map, e.paths, e.cost_delta, e.reason) for e in self]
        return pd.DataFrame(rows, columns=EVENT_COLUMNS)

    def write_csv(self, path: Path) -> Path:
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False)
        return path

    @classmethod
    def read_csv(cls, path: Path) -> "EventLog":
        frame = pd.read_csv(path, dtype={"node_map": str, "paths": str, "reason": str}, keep_default_na=False)
        return cls(
            events=[
                Event(
                    slot=int(row.slot),
                    request_id=int(row.request_id),
                    decision=Decision(row.decision),
                    node_map=row.node_map,
                    paths=row.paths,
                    cost_delta=float(row.cost_delta),
                    reason=row.reason,
                )
                for row in frame.itertuples(index=False)
            ]
        )


@dataclass
class _TemplateState:
    template: Template
    demand: float
    remaining: float
    unit_loads: ElementLoads


class PlanResidual:
    """
    Unconsumed weight of every plan template. A planned request of size d consumes d / d~ of its
    template's weight, where d~ is the expected demand of the aggregate, and returns it on departure.
    """

    def __init__(self, plan: Plan, applications: dict[str, Application], substrate: SubstrateNetwork) -> None:
        self._states: dict[str, _TemplateState] = {}
        self._by_key: dict[tuple[str, str], list[_TemplateState]] = {}
        for aggregate in plan.aggregates:
            if aggregate.app not in applications or not aggregate.templates or aggregate.expected_demand <= 0:
                continue
            app = applications[aggregate.app]
            states = [
                _TemplateState(
                    template=t,
                    demand=aggregate.expected_demand,
                    remaining=t.weight,
                    unit_loads=unit_loads(app, t.embedding, substrate),
                )
                for t in aggregate.templates
            ]
            self._by_key[aggregate.key] = states
            self._states.update({s.template.id: s for s in states})

    def has_aggregate(self, request: Request) -> bool:
        return request.key in self._by_key

    def templates_for(self, request: Request) -> list[_TemplateState]:
        return self._by_key.get(request.key, [])

    def remaining(self, template_id: str) -> float:
        return self._states[template_id].remaining

    def capacity(self, template_id: str) -> float:
        """Demand the template can still absorb, in request size units."""
        state = self._states[template_id]
        return state.remaining * state.demand

    def consume(self, template_id: str, size: float) -> None:
        state = self._states[template_id]
        state.remaining -= size / state.demand
        if state.remaining < -EPS:
            raise InvariantViolationProblem(detail=f"Template '{template_id}' is over-consumed ({state.remaining}).")
        state.remaining = max(state.remaining, 0.0)

    def drain(self, template_id: str, size: float) -> None:
        """Consume up to what is left; used when a request rounds onto a template smaller than itself."""
        state = self._states[template_id]
        state.remaining = max(state.remaining - size / state.demand, 0.0)

    def restore(self, template_id: str, size: float) -> None:
        state = self._states[template_id]
        state.remaining = min(state.remaining + size / state.demand, state.template.weight)

    def verify(self, t: int) -> None:
        """Template residuals lie in [0, weight] and every (virtual, substrate) residual is non-negative."""
        for key, states in self._by_key.items():
            per_pair: dict[tuple[str, str], float] = {}
            for state in states:
                if not -EPS <= state.remaining <= state.template.weight + EPS:
                    raise InvariantViolationProblem(
                        detail=f"Residual of template '{state.template.id}' left [0, weight] at slot {t}.",
                    )
                embedding = state.template.embedding
                for q, host in embedding.node_map.items():
                    per_pair[(q, host)] = per_pair.get((q, host), 0.0) + state.remaining
                for link, hops in embedding.paths.items():
                    for u, v in zip(hops, hops[1:]):
                        per_pair[(link, f"{u}>{v}")] = per_pair.get((link, f"{u}>{v}"), 0.0) + state.remaining
            negative = {pair: value for pair, value in per_pair.items() if value < -EPS}
            if negative:
                raise InvariantViolationProblem(
                    detail=f"Plan residual of aggregate {key} is negative at slot {t}.",
                    errors=[{"pair": list(pair), "residual": value} for pair, value in negative.items()],
                )


@dataclass
class EngineState:
    """Per-run mutable state: ledger, plan residual, statuses and the event log."""

    ledger: LoadLedger
    residual: PlanResidual
    events: EventLog = field(default_factory=EventLog)
    statuses: dict[int, RequestStatus] = field(default_factory=dict)
    decisions: dict[int, Decision] = field(default_factory=dict)
    done: set[int] = field(default_factory=set)
    planned: dict[int, str] = field(default_factory=dict)
    timeouts: set[int] = field(default_factory=set)

    def status(self, request_id: int) -> RequestStatus:
        return self.statuses.get(request_id, RequestStatus.PENDING)

    def move(self, request_id: int, status: RequestStatus) -> None:
        self.statuses[request_id] = advance(request_id, self.status(request_id), status)
