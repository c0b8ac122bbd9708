from enum import Enum

from pydantic import BaseModel, ConfigDict, Field

from model.problem.exception import InvariantViolationProblem


class RequestStatus(str, Enum):
    PENDING = "pending"
    ALLOCATED = "allocated"
    REJECTED = "rejected"
    PREEMPTED = "preempted"
    DEPARTED = "departed"


_TRANSITIONS: dict[RequestStatus, frozenset[RequestStatus]] = {
    RequestStatus.PENDING: frozenset({RequestStatus.ALLOCATED, RequestStatus.REJECTED}),
    RequestStatus.ALLOCATED: frozenset({RequestStatus.PREEMPTED, RequestStatus.DEPARTED}),
    RequestStatus.REJECTED: frozenset(),
    RequestStatus.PREEMPTED: frozenset(),
    RequestStatus.DEPARTED: frozenset(),
}


def advance(request_id: int, current: RequestStatus, new: RequestStatus) -> RequestStatus:
    if new not in _TRANSITIONS[current]:
        raise InvariantViolationProblem(
            detail=f"Request {request_id} cannot move from '{current.value}' to '{new.value}'."
        )
    return new


class Request(BaseModel):
    """
    One online arrival. Requests are immutable and shared between algorithms replaying the same
    trace; each run tracks statuses on its own.
    """

    model_config = ConfigDict(frozen=True)

    id: int = Field(ge=0)
    app: str
    origin: str
    size: float = Field(gt=0, allow_inf_nan=False)
    arrival: int = Field(ge=0)
    duration: int = Field(ge=1)

    @property
    def departure(self) -> int:
        return self.arrival + self.duration

    @property
    def key(self) -> tuple[str, str]:
        return self.app, self.origin

    @property
    def volume(self) -> float:
        """Demand integrated over the lifetime, in CU x slots."""
        return self.size * self.duration

    def is_active(self, t: int) -> bool:
        return self.arrival <= t < self.departure
