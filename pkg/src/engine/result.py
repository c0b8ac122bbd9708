from dataclasses import dataclass

import numpy as np

from config.logging_configurator import RunLogRecord
from engine.state import Decision, EngineState, EventLog
from model.ledger import LoadLedger
from model.request import Request, RequestStatus
from model.substrate import SubstrateNetwork


@dataclass
class RunResult:
    """Everything a finished simulation leaves behind for the metrics."""

    algorithm: str
    substrate: SubstrateNetwork
    requests: tuple[Request, ...]
    state: EngineState
    start: int
    end: int
    runtime_ms: float

    @property
    def ledger(self) -> LoadLedger:
        return self.state.ledger

    @property
    def events(self) -> EventLog:
        return self.state.events

    @property
    def timeouts(self) -> set[int]:
        return self.state.timeouts

    def status(self, request_id: int) -> RequestStatus:
        return self.state.status(request_id)

    def decision(self, request_id: int) -> Decision | None:
        return self.state.decisions.get(request_id)

    def history(self) -> tuple[np.ndarray, np.ndarray]:
        return self.ledger.history

    def was_rejected(self, request: Request) -> bool:
        """Rejected on arrival or preempted later; both count as rejections."""
        return self.status(request.id) in (RequestStatus.REJECTED, RequestStatus.PREEMPTED)

    def rejected(self) -> list[Request]:
        return [r for r in self.requests if self.was_rejected(r)]

    def accepted(self) -> list[Request]:
        return [r for r in self.requests if r.id in self.state.done]

    def decision_counts(self) -> dict[str, int]:
        counts = {decision.value: 0 for decision in Decision}
        for event in self.events:
            counts[event.decision.value] += 1
        return counts

    def log_record(self, **extra) -> dict:
        statuses = [self.status(r.id) for r in self.requests]
        return RunLogRecord.cell_attribute(
            algorithm=self.algorithm,
            slots=self.end - self.start,
            requests=len(self.requests),
            accepted=len(self.state.done & {r.id for r in self.requests}),
            rejected=statuses.count(RequestStatus.REJECTED),
            preempted=statuses.count(RequestStatus.PREEMPTED),
            duration_ms=round(self.runtime_ms),
            **extra,
        )
