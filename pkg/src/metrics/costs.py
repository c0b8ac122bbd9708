from typing import Iterable, Mapping

import numpy as np

from engine.result import RunResult
from engine.state import Decision
from model.application import Application
from model.request import Request
from model.substrate import SubstrateNetwork
from planner.psi import default_psi


def resource_cost(result: RunResult, window: tuple[int, int] | None = None) -> float:
    """Sum over recorded slots (optionally only those in [start, end)) of load times unit cost."""
    slots, loads = result.history()
    if window is not None:
        mask = (slots >= window[0]) & (slots < window[1])
        loads = loads[mask]
    if loads.size == 0:
        return 0.0
    return float(np.sum(loads @ result.substrate.unit_costs))


def incremental_resource_cost(result: RunResult, window: tuple[int, int] | None = None) -> float:
    """
    The same cost rebuilt from the event log: every logged cost rate is held from its slot until
    the request departs, is preempted or is moved, clipped to the window.
    """
    start, end = window if window is not None else (result.start, result.end)
    departures = {r.id: r.departure for r in result.requests}
    held: dict[int, tuple[int, float]] = {}
    total = 0.0

    def close(request_id: int, slot: int) -> float:
        since, rate = held.pop(request_id)
        first, last = max(since, start), min(slot, departures[request_id], end)
        return rate * max(last - first, 0)

    for event in result.events:
        if event.request_id in held and (event.decision.accepts or event.decision == Decision.PREEMPTED):
            rate = held[event.request_id][1]
            total += close(event.request_id, event.slot)
            if event.decision.accepts:
                held[event.request_id] = (event.slot, rate + event.cost_delta)
        elif event.decision.accepts:
            held[event.request_id] = (event.slot, event.cost_delta)
    for request_id in list(held):
        total += close(request_id, result.end)
    return total


def application_psi(
    applications: Iterable[Application], substrate: SubstrateNetwork, override: float | None = None
) -> dict[str, float]:
    return {app.id: override if override is not None else default_psi(app, substrate) for app in applications}


def rejection_cost(rejected: Iterable[Request], psi: Mapping[str, float]) -> float:
    """Lost profit: size times duration times the application's rejection factor, summed."""
    return float(sum(r.volume * psi[r.app] for r in rejected))
