import heapq
from dataclasses import dataclass

import numpy as np

from model.embedding import Embedding
from model.loads import ElementLoads, as_vector
from model.problem.exception import InvariantViolationProblem
from model.request import Request
from model.substrate import SubstrateNetwork

# Absolute slack used when comparing plan quantities coming out of the LP.
EPS = 1e-9
LEDGER_RTOL = 1e-9


@dataclass(frozen=True)
class Allocation:
    request: Request
    embedding: Embedding
    loads: ElementLoads
    slot: int

    @property
    def planned(self) -> bool:
        return self.embedding.planned


class LoadLedger:
    """
    Current load of every substrate element together with the allocations producing it.

    Additions are checked exactly against capacity (no tolerance) so the stored loads can never
    exceed it. Removing an allocation subtracts exactly what was added; an element left without
    contributors is reset to zero so round-off never accumulates on idle elements.
    """

    def __init__(self, substrate: SubstrateNetwork) -> None:
        self.substrate = substrate
        self._capacity = substrate.capacities
        self._load = np.zeros(substrate.size)
        self._contributors: list[set[int]] = [set() for _ in range(substrate.size)]
        self._allocations: dict[int, Allocation] = {}
        self._departures: list[tuple[int, int]] = []
        self._history_slots: list[int] = []
        self._history: list[np.ndarray] = []

    @property
    def load(self) -> np.ndarray:
        return self._load.copy()

    @property
    def allocations(self) -> dict[int, Allocation]:
        return dict(self._allocations)

    def allocation(self, request_id: int) -> Allocation | None:
        return self._allocations.get(request_id)

    def __contains__(self, request_id: int) -> bool:
        return request_id in self._allocations

    def __len__(self) -> int:
        return len(self._allocations)

    def contributors(self, index: int) -> frozenset[int]:
        return frozenset(self._contributors[index])

    def residual(self) -> np.ndarray:
        return self._capacity - self._load

    def admits(self, index: int, amount: float) -> bool:
        return self._load[index] + amount <= self._capacity[index]

    def fits(self, loads: ElementLoads) -> bool:
        return all(self._load[i] + amount <= self._capacity[i] for i, amount in loads.items())

    def add(
        self, request: Request, embedding: Embedding, loads: ElementLoads, slot: int, check: bool = True
    ) -> Allocation:
        """Book an allocation. With check=False the capacity test is skipped, which only replay does."""
        if request.id in self._allocations:
            raise InvariantViolationProblem(detail=f"Request {request.id} is already allocated.")
        if check and not self.fits(loads):
            overflow = [
                self.substrate.element_ids[i] for i, a in loads.items() if self._load[i] + a > self._capacity[i]
            ]
            raise InvariantViolationProblem(
                detail=f"Allocating request {request.id} at slot {slot} would exceed capacity.",
                errors=[{"element": element} for element in overflow],
            )
        for i, amount in loads.items():
            self._load[i] += amount
            self._contributors[i].add(request.id)
        allocation = Allocation(request=request, embedding=embedding, loads=dict(loads), slot=slot)
        self._allocations[request.id] = allocation
        heapq.heappush(self._departures, (request.departure, request.id))
        return allocation

    def remove(self, request_id: int) -> Allocation:
        allocation = self._allocations.pop(request_id, None)
        if allocation is None:
            raise InvariantViolationProblem(detail=f"Request {request_id} is not allocated.")
        for i, amount in allocation.loads.items():
            self._contributors[i].discard(request_id)
            if self._contributors[i]:
                self._load[i] = max(self._load[i] - amount, 0.0)
            else:
                self._load[i] = 0.0
        return allocation

    def load_without(self, request_ids: list[int]) -> np.ndarray:
        """The load `remove` would leave after removing the given requests in order; the ledger is untouched."""
        load = self._load.copy()
        removed: set[int] = set()
        for request_id in request_ids:
            removed.add(request_id)
            for i, amount in self._allocations[request_id].loads.items():
                load[i] = max(load[i] - amount, 0.0) if self._contributors[i] - removed else 0.0
        return load

    def release_departures(self, t: int) -> list[Allocation]:
        """Remove every allocation whose request has departed by slot t, in (departure, id) order."""
        released = []
        while self._departures and self._departures[0][0] <= t:
            _, request_id = heapq.heappop(self._departures)
            # Preempted requests left the ledger already.
            if request_id in self._allocations:
                released.append(self.remove(request_id))
        return released

    def clear(self) -> list[Allocation]:
        released = [self.remove(request_id) for request_id in sorted(self._allocations)]
        self._departures.clear()
        return released

    def recompute(self) -> np.ndarray:
        return sum(
            (as_vector(a.loads, self.substrate.size) for a in self._allocations.values()),
            np.zeros(self.substrate.size),
        )

    def verify(self, t: int) -> None:
        """Capacity safety (exact) and agreement with a from-scratch recomputation."""
        over = np.flatnonzero(self._load > self._capacity)
        if over.size:
            raise InvariantViolationProblem(
                detail=f"Capacity exceeded at slot {t}.",
                errors=[{"element": self.substrate.element_ids[i], "load": float(self._load[i])} for i in over],
            )
        expected = self.recompute()
        drift = np.abs(self._load - expected)
        if np.any(drift > LEDGER_RTOL * np.maximum(self._capacity, 1.0)):
            worst = int(np.argmax(drift))
            raise InvariantViolationProblem(
                detail=f"Ledger drifted from its allocations at slot {t}.",
                errors=[{"element": self.substrate.element_ids[worst], "drift": float(drift[worst])}],
            )

    def snapshot(self, t: int) -> None:
        self._history_slots.append(t)
        self._history.append(self._load.copy())

    @property
    def history(self) -> tuple[np.ndarray, np.ndarray]:
        """(slots, loads) where loads[k] is the load vector recorded at slots[k]."""
        if not self._history:
            return np.zeros(0, dtype=int), np.zeros((0, self.substrate.size))
        return np.array(self._history_slots, dtype=int), np.vstack(self._history)


def substrate_residual(ledger: LoadLedger, substrate: SubstrateNetwork) -> np.ndarray:
    residual = substrate.capacities - ledger.load
    if np.any(residual < 0):
        negative = [substrate.element_ids[i] for i in np.flatnonzero(residual < 0)]
        raise InvariantViolationProblem(
            detail="Negative residual capacity.", errors=[{"element": element} for element in negative]
        )
    return residual


def check_substrate_fit(candidate: ElementLoads, residual: np.ndarray) -> bool:
    return all(amount <= residual[i] for i, amount in candidate.items())


def release_departures(ledger: LoadLedger, t: int) -> list[int]:
    return [allocation.request.id for allocation in ledger.release_departures(t)]
