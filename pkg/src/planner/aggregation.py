from collections import defaultdict
from typing import Iterable

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from model.request import Request


class AggregateRequest(BaseModel):
    """All history requests of one (application, origin) class and their per-slot demand."""

    model_config = ConfigDict(frozen=True)

    app: str
    origin: str
    members: tuple[int, ...] = ()
    series: tuple[float, ...] = ()
    expected_demand: float = Field(default=0.0, ge=0)
    ci_low: float = 0.0
    ci_high: float = 0.0
    psi: float = Field(default=0.0, ge=0)

    @property
    def key(self) -> tuple[str, str]:
        return self.app, self.origin


def demand_series(requests: Iterable[Request], start: int, slots: int) -> np.ndarray:
    """Sum of active request sizes for every slot of [start, start + slots)."""
    delta = np.zeros(slots + 1)
    for r in requests:
        first = max(r.arrival - start, 0)
        last = min(r.departure - start, slots)
        if first < last:
            delta[first] += r.size
            delta[last] -= r.size
    return np.cumsum(delta[:-1])


def aggregate_history(
    history: Iterable[Request],
    slots: int | None = None,
    start: int = 0,
) -> tuple[AggregateRequest, ...]:
    """
    Group history requests by (application, origin). The demand series covers `slots` slots from
    `start`; by default it runs until the last departure.
    """
    history = list(history)
    if not history:
        return ()
    if slots is None:
        slots = max(r.departure for r in history) - start

    grouped: dict[tuple[str, str], list[Request]] = defaultdict(list)
    for request in history:
        grouped[request.key].append(request)

    return tuple(
        AggregateRequest(
            app=app,
            origin=origin,
            members=tuple(r.id for r in grouped[(app, origin)]),
            series=tuple(float(v) for v in demand_series(grouped[(app, origin)], start, slots)),
        )
        for app, origin in sorted(grouped)
    )
