from enum import Enum
from typing import Iterable

from pydantic import BaseModel, ConfigDict, Field, model_validator

from baselines.slotoff import SlotOffEngine
from engine.embedders import FullEmbedder
from engine.olive import OliveEngine
from engine.result import RunResult
from model.application import Application
from model.problem.exception import MissingArtifactProblem, ValidationProblem
from model.substrate import SubstrateNetwork
from planner.config import PlanConfig
from planner.plan import EMPTY_PLAN, Plan
from workload.trace import Trace


class Algorithm(str, Enum):
    OLIVE = "OLIVE"
    QUICKG = "QUICKG"
    FULLG = "FULLG"
    SLOTOFF = "SLOTOFF"

    @classmethod
    def parse(cls, value: str) -> "Algorithm":
        try:
            return cls(value.strip().upper())
        except ValueError:
            raise ValidationProblem(
                detail=f"Unknown algorithm '{value}'.", errors=[{"allowed": [a.value for a in cls]}]
            ) from None


class BaselineKind(BaseModel):
    """A comparison algorithm and its settings."""

    model_config = ConfigDict(frozen=True)

    algorithm: Algorithm
    fullg_budget: int = Field(default=1_000_000, ge=1)
    slotoff: PlanConfig = PlanConfig()

    @model_validator(mode="after")
    def _not_olive(self) -> "BaselineKind":
        if self.algorithm == Algorithm.OLIVE:
            raise ValidationProblem(detail="OLIVE is not a baseline.")
        return self

    def run(self, substrate: SubstrateNetwork, applications: Iterable[Application], trace: Trace) -> RunResult:
        match self.algorithm:
            case Algorithm.QUICKG:
                return run_quickg(substrate, applications, trace)
            case Algorithm.FULLG:
                return run_fullg(substrate, applications, trace, budget=self.fullg_budget)
            case Algorithm.SLOTOFF:
                return run_slotoff(substrate, applications, trace, self.slotoff)


def run_quickg(substrate: SubstrateNetwork, applications: Iterable[Application], trace: Trace) -> RunResult:
    """OLIVE with an empty plan; slots whose nodes are all full reject at once."""
    engine = OliveEngine(
        substrate, applications, EMPTY_PLAN, saturation_short_circuit=True, name=Algorithm.QUICKG.value
    )
    return engine.run(trace)


def run_fullg(
    substrate: SubstrateNetwork, applications: Iterable[Application], trace: Trace, budget: int = 1_000_000
) -> RunResult:
    engine = OliveEngine(
        substrate, applications, EMPTY_PLAN, fallback=FullEmbedder(substrate, budget), name=Algorithm.FULLG.value
    )
    return engine.run(trace)


def run_slotoff(
    substrate: SubstrateNetwork, applications: Iterable[Application], trace: Trace, config: PlanConfig = PlanConfig()
) -> RunResult:
    return SlotOffEngine(substrate, applications, config, name=Algorithm.SLOTOFF.value).run(trace)


def run_olive(
    substrate: SubstrateNetwork, applications: Iterable[Application], trace: Trace, plan: Plan | None
) -> RunResult:
    if plan is None:
        raise MissingArtifactProblem(detail="OLIVE needs a plan; run the plan command first.")
    return OliveEngine(substrate, applications, plan, name=Algorithm.OLIVE.value).run(trace)


def simulate(
    algorithm: Algorithm,
    substrate: SubstrateNetwork,
    applications: Iterable[Application],
    trace: Trace,
    plan: Plan | None = None,
    plan_config: PlanConfig = PlanConfig(),
    fullg_budget: int = 1_000_000,
) -> RunResult:
    if algorithm == Algorithm.OLIVE:
        return run_olive(substrate, applications, trace, plan)
    kind = BaselineKind(algorithm=algorithm, fullg_budget=fullg_budget, slotoff=plan_config)
    return kind.run(substrate, applications, trace)
