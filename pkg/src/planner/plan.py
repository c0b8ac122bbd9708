from functools import cached_property

from pydantic import BaseModel, ConfigDict, Field

from model.embedding import Embedding


class Template(BaseModel):
    """One integral embedding of an aggregate and the fraction of its expected demand it serves."""

    model_config = ConfigDict(frozen=True)

    id: str
    embedding: Embedding
    weight: float = Field(gt=0, le=1 + 1e-9)


class PlanAggregate(BaseModel):
    model_config = ConfigDict(frozen=True)

    app: str
    origin: str
    expected_demand: float = Field(ge=0)
    ci_low: float = 0.0
    ci_high: float = 0.0
    psi: float = Field(default=0.0, ge=0)
    allocated: float = Field(default=0.0, ge=0)
    rejected_quantiles: tuple[float, ...] = ()
    node_solution: dict[str, dict[str, float]] = {}
    flow_solution: dict[str, dict[str, float]] = {}
    templates: tuple[Template, ...] = ()

    @property
    def key(self) -> tuple[str, str]:
        return self.app, self.origin

    @property
    def template_weight(self) -> float:
        return sum(t.weight for t in self.templates)


class Plan(BaseModel):
    """The offline plan: per aggregate the fractional LP solution and its weighted templates."""

    model_config = ConfigDict(frozen=True)

    aggregates: tuple[PlanAggregate, ...] = ()
    objective: float = 0.0
    quantiles: int = Field(default=10, ge=1)
    history_slots: int = 0

    @cached_property
    def by_key(self) -> dict[tuple[str, str], PlanAggregate]:
        return {aggregate.key: aggregate for aggregate in self.aggregates}

    def aggregate(self, app: str, origin: str) -> PlanAggregate | None:
        return self.by_key.get((app, origin))

    @property
    def is_empty(self) -> bool:
        return not any(aggregate.templates for aggregate in self.aggregates)


EMPTY_PLAN = Plan()
