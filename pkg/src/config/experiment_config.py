import json
from pathlib import Path
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, ValidationInfo, field_validator, model_validator

from baselines.runners import Algorithm
from config.environment_loader import Environment
from metrics.report import MeasurementWindow
from model.problem.exception import MissingArtifactProblem, ValidationProblem
from planner.config import PlanConfig
from workload.applications import ApplicationSpec
from workload.topology import TopologySpec
from workload.trace import TraceSpec

# Sections that may be given inline or as the path of a JSON file, relative to the config file.
_REFERABLE = ("topology", "applications", "trace", "plan")


def parse_seeds(value: str) -> tuple[int, ...]:
    """'3' -> (3,), '0,2,5' -> (0, 2, 5), '0-4' -> (0, 1, 2, 3, 4); ranges and lists may be mixed."""
    seeds: list[int] = []
    for part in (p.strip() for p in value.split(",") if p.strip()):
        try:
            if "-" in part:
                first, last = part.split("-", 1)
                seeds.extend(range(int(first), int(last) + 1))
            else:
                seeds.append(int(part))
        except ValueError:
            raise ValidationProblem(detail=f"Cannot read seeds from '{value}'.") from None
    return tuple(seeds)


def parse_floats(value: str) -> tuple[float, ...]:
    try:
        return tuple(float(p) for p in value.split(",") if p.strip())
    except ValueError:
        raise ValidationProblem(detail=f"Cannot read numbers from '{value}'.") from None


class ExperimentConfig(BaseModel):
    """
    One experiment: how to build the substrate, applications and traces, how to plan, and which
    algorithm x seed x utilization cells to simulate. Utilizations are percentages of the total
    edge node capacity.
    """

    model_config = ConfigDict(frozen=True)

    name: str = "olive"
    topology: TopologySpec = TopologySpec(preset="tiered-10")
    applications: ApplicationSpec = ApplicationSpec()
    trace: TraceSpec = TraceSpec()
    trace_file: Path | None = None
    plan: PlanConfig = PlanConfig()
    algorithms: tuple[Algorithm, ...] = (Algorithm.OLIVE, Algorithm.QUICKG, Algorithm.SLOTOFF)
    seeds: tuple[int, ...] = (0,)
    utilizations: tuple[float, ...] = (100.0,)
    plan_utilization: float | None = Field(default=None, ge=20, le=200)
    shift_plan_origins: bool = False
    window: MeasurementWindow = MeasurementWindow()
    fullg_budget: int = Field(default=1_000_000, ge=1)
    output_dir: Path = Path("out")
    workers: int = Field(default=1, ge=1)

    @model_validator(mode="before")
    @classmethod
    def _resolve_references(cls, data: Any, info: ValidationInfo) -> Any:
        if not isinstance(data, dict):
            return data
        base = Path((info.context or {}).get("base", "."))
        resolved = dict(data)
        for key in _REFERABLE:
            if isinstance(resolved.get(key), str):
                resolved[key] = json.loads(_existing(base / resolved[key]).read_text())
        if isinstance(resolved.get("trace_file"), str):
            resolved["trace_file"] = str(_existing(base / resolved["trace_file"]))
        return resolved

    @field_validator("algorithms", mode="before")
    @classmethod
    def _parse_algorithms(cls, value: Any) -> Any:
        if isinstance(value, str):
            value = value.split(",")
        return tuple(Algorithm.parse(v) if isinstance(v, str) else v for v in value)

    @field_validator("seeds")
    @classmethod
    def _unique_seeds(cls, value: tuple[int, ...]) -> tuple[int, ...]:
        if not value:
            raise ValidationProblem(detail="At least one seed is required.")
        if len(set(value)) != len(value):
            raise ValidationProblem(detail=f"Seeds must be unique, got {list(value)}.")
        return value

    @field_validator("utilizations")
    @classmethod
    def _check_utilizations(cls, value: tuple[float, ...]) -> tuple[float, ...]:
        if not value or any(not 20 <= u <= 200 for u in value):
            raise ValidationProblem(detail=f"Utilizations must be percentages in [20, 200], got {list(value)}.")
        return value

    @model_validator(mode="after")
    def _check_trace_file(self) -> "ExperimentConfig":
        if self.trace_file is not None and not self.trace_file.exists():
            raise MissingArtifactProblem(detail=f"Trace file {self.trace_file} does not exist.")
        return self

    @classmethod
    def load(cls, path: Path | None = None, **overrides: Any) -> "ExperimentConfig":
        """
        Read the JSON document at `path` (defaults only when None), then apply environment
        overrides, then the given overrides (command line flags); None overrides are ignored.
        """
        document: dict[str, Any] = {}
        base = Path(".")
        if path is not None:
            document = json.loads(_existing(path).read_text())
            base = path.parent
        if Environment.SEEDS.is_set():
            document["seeds"] = parse_seeds(Environment.SEEDS.get())
        if Environment.OUTPUT_DIR.is_set():
            document["output_dir"] = Environment.OUTPUT_DIR.get()
        if Environment.WORKERS.is_set():
            document["workers"] = int(Environment.WORKERS.get())
        document |= {key: value for key, value in overrides.items() if value is not None}
        return cls.model_validate(document, context={"base": str(base)})


def _existing(path: Path) -> Path:
    if not path.exists():
        raise MissingArtifactProblem(detail=f"Required file not found: {path}", instance=str(path))
    return path
