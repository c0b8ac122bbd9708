from itertools import groupby
from typing import Iterable

import numpy as np

from config import logging_configurator
from engine.state import Decision, EventLog
from model.application import Application
from model.embedding import Embedding, validate_for_request
from model.ledger import LEDGER_RTOL, LoadLedger
from model.loads import request_loads
from model.problem.exception import InvariantViolationProblem
from model.substrate import SubstrateNetwork
from workload.trace import Trace

LOGGER = logging_configurator.logger(__name__)


def replay(
    substrate: SubstrateNetwork,
    applications: Iterable[Application],
    trace: Trace,
    events: EventLog,
    end: int | None = None,
) -> LoadLedger:
    """
    Rebuild the ledger an engine run ended with from its event log alone. Loads are recomputed from
    the logged embeddings, departures come from the trace durations.
    """
    apps = {app.id: app for app in applications}
    ledger = LoadLedger(substrate)
    end = trace.horizon if end is None else end
    by_slot = {slot: list(group) for slot, group in groupby(events, key=lambda e: e.slot)}
    start = min(by_slot, default=end)

    for t in range(start, end):
        ledger.release_departures(t)
        for event in by_slot.get(t, ()):
            request = trace.by_id[event.request_id]
            if event.decision == Decision.PREEMPTED or (event.decision.accepts and request.id in ledger):
                ledger.remove(request.id)
            if event.decision.accepts:
                app = apps[request.app]
                embedding = Embedding.parse(event.node_map, event.paths).bind(
                    request.id, planned=event.decision == Decision.PLANNED
                )
                validate_for_request(embedding, request, app, substrate)
                ledger.add(request, embedding, request_loads(request, app, embedding, substrate), t, check=False)
        ledger.snapshot(t)
    LOGGER.debug("Replayed event log", extra={"events": len(events), "active": len(ledger)})
    return ledger


def assert_same_state(expected: LoadLedger, replayed: LoadLedger) -> None:
    """Same active requests and the same final load, up to ledger round-off."""
    if set(expected.allocations) != set(replayed.allocations):
        raise InvariantViolationProblem(
            detail="Replay ended with a different set of active requests.",
            errors=[{"request_id": r} for r in sorted(set(expected.allocations) ^ set(replayed.allocations))],
        )
    tolerance = LEDGER_RTOL * np.maximum(expected.substrate.capacities, 1.0)
    if np.any(np.abs(expected.load - replayed.load) > tolerance):
        raise InvariantViolationProblem(detail="Replay ended with a different load.")
