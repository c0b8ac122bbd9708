from collections import defaultdict
from functools import cached_property

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from config import logging_configurator
from model.application import Application
from model.problem.exception import ValidationProblem
from model.request import Request
from model.substrate import SubstrateNetwork

LOGGER = logging_configurator.logger(__name__)


class TraceSpec(BaseModel):
    """
    Arrival process of the workload. Every edge node runs its own two-state Markov-modulated Poisson
    process; the popularity weight of a node (Zipf over a seeded ranking) scales both state rates.
    Sizes are normal, floored at `size_floor`; durations are geometric with mean `duration_mean`.
    """

    model_config = ConfigDict(frozen=True)

    history_slots: int = Field(default=5400, ge=0)
    test_slots: int = Field(default=600, ge=0)
    rate: float = Field(default=10.0, ge=0)
    rate_high: float | None = Field(default=None, ge=0)
    rate_low: float | None = Field(default=None, ge=0)
    switch_up: float = Field(default=0.05, gt=0, lt=1)
    switch_down: float = Field(default=0.05, gt=0, lt=1)
    size_mean: float = Field(default=10.0, gt=0)
    size_std: float = Field(default=2.0, ge=0)
    size_floor: float = Field(default=0.1, gt=0)
    duration_mean: float = Field(default=10.0, ge=1)
    zipf_alpha: float = Field(default=1.0, ge=0)
    app_weights: dict[str, float] | None = None
    seed: int = 0

    @model_validator(mode="after")
    def _check_states(self) -> "TraceSpec":
        if self.rate > 0 and not self.high_rate > self.low_rate:
            raise ValidationProblem(
                detail=f"MMPP high rate {self.high_rate} must exceed low rate {self.low_rate}.",
            )
        if self.app_weights is not None and (
            any(w < 0 for w in self.app_weights.values()) or sum(self.app_weights.values()) <= 0
        ):
            raise ValidationProblem(detail="Application weights must be non-negative with a positive sum.")
        return self

    @property
    def horizon(self) -> int:
        return self.history_slots + self.test_slots

    @property
    def high_rate(self) -> float:
        return self.rate_high if self.rate_high is not None else 1.5 * self.rate

    @property
    def low_rate(self) -> float:
        return self.rate_low if self.rate_low is not None else 0.5 * self.rate

    @property
    def high_share(self) -> float:
        """Stationary probability of the high state."""
        return self.switch_up / (self.switch_up + self.switch_down)

    @property
    def mean_rate(self) -> float:
        return self.high_share * self.high_rate + (1 - self.high_share) * self.low_rate


class Trace(BaseModel):
    """Requests sorted by arrival slot; inside a slot the order is the seeded processing order."""

    model_config = ConfigDict(frozen=True)

    requests: tuple[Request, ...]
    history_slots: int = Field(default=0, ge=0)
    test_slots: int = Field(default=0, ge=0)
    seed: int | None = None
    spec: TraceSpec | None = None

    @model_validator(mode="after")
    def _check_order(self) -> "Trace":
        arrivals = [r.arrival for r in self.requests]
        if any(a > b for a, b in zip(arrivals, arrivals[1:])):
            raise ValidationProblem(detail="Trace requests are not sorted by arrival slot.")
        ids = [r.id for r in self.requests]
        if len(set(ids)) != len(ids):
            raise ValidationProblem(detail="Trace request ids are not unique.")
        return self

    @property
    def horizon(self) -> int:
        return self.history_slots + self.test_slots

    @property
    def test_start(self) -> int:
        return self.history_slots

    def history(self) -> tuple[Request, ...]:
        return tuple(r for r in self.requests if r.arrival < self.history_slots)

    def test(self) -> tuple[Request, ...]:
        return tuple(r for r in self.requests if self.history_slots <= r.arrival < self.horizon)

    @cached_property
    def by_slot(self) -> dict[int, tuple[Request, ...]]:
        grouped: dict[int, list[Request]] = defaultdict(list)
        for request in self.requests:
            grouped[request.arrival].append(request)
        return {slot: tuple(requests) for slot, requests in grouped.items()}

    @cached_property
    def by_id(self) -> dict[int, Request]:
        return {r.id: r for r in self.requests}


def popularity_weights(count: int, alpha: float) -> np.ndarray:
    """Zipf weights over ranks 1..count, normalised to mean 1."""
    if count == 0:
        return np.zeros(0)
    raw = 1.0 / np.arange(1, count + 1) ** alpha
    return raw * count / raw.sum()


def mmpp_counts(spec: TraceSpec, weights: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Arrivals per (slot, node) for independent per-node MMPPs started from the stationary state."""
    nodes = len(weights)
    counts = np.zeros((spec.horizon, nodes), dtype=int)
    if nodes == 0 or spec.rate == 0:
        return counts
    high = rng.random(nodes) < spec.high_share
    for t in range(spec.horizon):
        if t > 0:
            flip = rng.random(nodes)
            high = np.where(high, flip >= spec.switch_down, flip < spec.switch_up)
        rates = np.where(high, spec.high_rate, spec.low_rate) * weights
        counts[t] = rng.poisson(rates)
    return counts


def gen_mmpp_trace(
    spec: TraceSpec,
    rng: np.random.Generator | None,
    substrate: SubstrateNetwork,
    applications: tuple[Application, ...],
) -> Trace:
    """
    Independent streams drive states, popularity, request attributes and in-slot ordering so that
    changing one distribution leaves the others untouched.
    """
    rng = rng if rng is not None else np.random.default_rng(spec.seed)
    state_rng, rank_rng, attribute_rng, order_rng = rng.spawn(4)

    origins = [node.id for node in substrate.edge_nodes]
    if not origins and spec.rate > 0:
        raise ValidationProblem(detail="The substrate has no edge nodes to originate requests.")
    if not applications:
        raise ValidationProblem(detail="The application set is empty.")

    ranking = rank_rng.permutation(len(origins))
    weights = np.zeros(len(origins))
    weights[ranking] = popularity_weights(len(origins), spec.zipf_alpha)
    counts = mmpp_counts(spec, weights, state_rng)

    app_ids = [app.id for app in applications]
    mix = np.array([(spec.app_weights or {}).get(a, 1.0 if spec.app_weights is None else 0.0) for a in app_ids])
    if mix.sum() <= 0:
        raise ValidationProblem(detail=f"Application weights select none of {app_ids}.")
    mix = mix / mix.sum()

    requests: list[Request] = []
    for t in range(spec.horizon):
        slot_origins = np.repeat(np.arange(len(origins)), counts[t])
        n = len(slot_origins)
        if n == 0:
            continue
        sizes = np.maximum(attribute_rng.normal(spec.size_mean, spec.size_std, size=n), spec.size_floor)
        # Geometric: the slotted counterpart of an exponential lifetime, at least one slot long.
        durations = attribute_rng.geometric(1.0 / spec.duration_mean, size=n)
        apps = attribute_rng.choice(len(app_ids), size=n, p=mix)
        for k in order_rng.permutation(n):
            requests.append(
                Request.model_construct(
                    id=len(requests),
                    app=app_ids[apps[k]],
                    origin=origins[slot_origins[k]],
                    size=float(sizes[k]),
                    arrival=t,
                    duration=int(durations[k]),
                )
            )

    LOGGER.info("Generated trace", extra={"requests": len(requests), "slots": spec.horizon, "seed": spec.seed})
    return Trace(
        requests=tuple(requests),
        history_slots=spec.history_slots,
        test_slots=spec.test_slots,
        seed=spec.seed,
        spec=spec,
    )
