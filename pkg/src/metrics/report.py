from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import stats

from config import logging_configurator
from engine.result import RunResult
from engine.state import Decision
from metrics.costs import incremental_resource_cost, rejection_cost, resource_cost
from metrics.rejection import balance_index, rejection_counts, rejection_rate
from model.problem.exception import InvariantViolationProblem, ValidationProblem

LOGGER = logging_configurator.logger(__name__)

RESULT_COLUMNS = [
    "algorithm",
    "seed",
    "utilization",
    "rejection_rate_demand",
    "rejection_rate_count",
    "resource_cost",
    "rejection_cost",
    "balance_index",
    "runtime_ms",
]
SLOT_COLUMNS = [
    "slot",
    "arrived_demand",
    "allocated_demand",
    "rejected_demand",
    "preempted_demand",
    "active_demand",
    "resource_cost",
]
SUMMARY_METRICS = RESULT_COLUMNS[3:]

# Relative drift tolerated between the cost of the ledger history and the one rebuilt from events.
COST_RTOL = 1e-6


class MeasurementWindow(BaseModel):
    """Slots [start, end) counted from the first test slot; requests are attributed by arrival."""

    model_config = ConfigDict(frozen=True)

    start: int = Field(default=100, ge=0)
    end: int = Field(default=500, ge=1)

    @model_validator(mode="after")
    def _ordered(self) -> "MeasurementWindow":
        if self.end <= self.start:
            raise ValidationProblem(detail=f"Measurement window [{self.start}, {self.end}) is empty.")
        return self

    def absolute(self, result: RunResult) -> tuple[int, int]:
        return result.start + self.start, min(result.start + self.end, result.end)


@dataclass
class RunReport:
    algorithm: str
    seed: int
    utilization: float
    rejection_rate_demand: float
    rejection_rate_count: float
    resource_cost: float
    rejection_cost: float
    balance_index: float
    balance_flagged: bool
    runtime_ms: float
    timeouts: int
    decisions: dict[str, int]
    per_slot: pd.DataFrame = field(repr=False)

    def __post_init__(self) -> None:
        if self.resource_cost < 0 or self.rejection_cost < 0:
            raise InvariantViolationProblem(detail=f"Negative cost reported for {self.algorithm}.")
        arrived = self.per_slot["arrived_demand"].to_numpy()
        allocated = self.per_slot["allocated_demand"].to_numpy()
        if np.any(allocated > arrived + 1e-9 * np.maximum(arrived, 1.0)):
            raise InvariantViolationProblem(detail=f"{self.algorithm} allocated more demand than arrived.")

    @property
    def total_cost(self) -> float:
        return self.resource_cost + self.rejection_cost

    def row(self) -> dict:
        return {column: getattr(self, column) for column in RESULT_COLUMNS}


def per_slot_demand(result: RunResult) -> pd.DataFrame:
    """Arrived, allocated, rejected and preempted demand of every slot, with the active demand and cost."""
    offset, length = result.start, result.end - result.start
    arrived, allocated, rejected, preempted, active = (np.zeros(length) for _ in range(5))

    lost_at = {e.request_id: e.slot for e in result.events if e.decision == Decision.PREEMPTED}
    for request in result.requests:
        k = request.arrival - offset
        arrived[k] += request.size
        if request.id not in result.state.done:
            rejected[k] += request.size
            continue
        allocated[k] += request.size
        last = min(lost_at.get(request.id, request.departure), request.departure, result.end)
        active[k : last - offset] += request.size
        if request.id in lost_at and lost_at[request.id] < result.end:
            preempted[lost_at[request.id] - offset] += request.size

    cost = np.zeros(length)
    slots, loads = result.history()
    if slots.size:
        cost[slots - offset] = loads @ result.substrate.unit_costs
    return pd.DataFrame(
        {
            "slot": np.arange(result.start, result.end),
            "arrived_demand": arrived,
            "allocated_demand": allocated,
            "rejected_demand": rejected,
            "preempted_demand": preempted,
            "active_demand": active,
            "resource_cost": cost,
        },
        columns=SLOT_COLUMNS,
    )


def build_report(
    result: RunResult,
    psi: Mapping[str, float],
    applications: Iterable[str],
    seed: int,
    utilization: float,
    window: MeasurementWindow = MeasurementWindow(),
) -> RunReport:
    lo, hi = window.absolute(result)
    measured = [r for r in result.requests if lo <= r.arrival < hi]
    demand_rate, count_rate = rejection_rate(measured, result.was_rejected)
    rejections, totals = rejection_counts(measured, result.was_rejected)
    balance = balance_index(rejections, totals, applications)

    cost = resource_cost(result, (lo, hi))
    rebuilt = incremental_resource_cost(result, (lo, hi))
    if abs(cost - rebuilt) > COST_RTOL * max(abs(cost), 1.0):
        raise InvariantViolationProblem(
            detail=f"Resource cost of {result.algorithm} disagrees with its event log.",
            errors=[{"ledger": cost, "events": rebuilt}],
        )

    report = RunReport(
        algorithm=result.algorithm,
        seed=seed,
        utilization=utilization,
        rejection_rate_demand=demand_rate,
        rejection_rate_count=count_rate,
        resource_cost=cost,
        rejection_cost=rejection_cost((r for r in measured if result.was_rejected(r)), psi),
        balance_index=balance.value,
        balance_flagged=balance.flagged,
        runtime_ms=result.runtime_ms,
        timeouts=len(result.timeouts),
        decisions=result.decision_counts(),
        per_slot=per_slot_demand(result),
    )
    if balance.flagged:
        LOGGER.info("Nothing rejected; balance index reported as 1", extra={"algorithm": result.algorithm})
    LOGGER.info(
        "Built run report",
        extra=result.log_record(seed=seed, utilization=utilization)
        | {"rejection_rate": round(demand_rate, 6), "timeouts": report.timeouts},
    )
    return report


def results_frame(rows: Iterable[Mapping]) -> pd.DataFrame:
    return pd.DataFrame(list(rows), columns=RESULT_COLUMNS)


def read_results(path: Path) -> pd.DataFrame:
    if not path.exists():
        return results_frame([])
    return pd.read_csv(path)


def append_results(path: Path, rows: Iterable[Mapping]) -> None:
    """Append rows, writing the header only when the file is new."""
    frame = results_frame(rows)
    if frame.empty:
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    header = not path.exists() or path.stat().st_size == 0
    frame.to_csv(path, mode="a", header=header, index=False)


def completed_cells(frame: pd.DataFrame) -> set[tuple[str, int, float]]:
    """(algorithm, seed, utilization) of every row already in a results file."""
    return {
        (str(row.algorithm), int(row.seed), round(float(row.utilization), 6))
        for row in frame[["algorithm", "seed", "utilization"]].itertuples(index=False)
    }


def summarize(results: pd.DataFrame, confidence: float = 0.95) -> pd.DataFrame:
    """Mean and Student-t confidence interval of every metric per (algorithm, utilization)."""
    rows = []
    for (algorithm, utilization), group in results.groupby(["algorithm", "utilization"], sort=True):
        row = {"algorithm": algorithm, "utilization": utilization, "runs": len(group)}
        for metric in SUMMARY_METRICS:
            values = group[metric].to_numpy(dtype=float)
            mean = float(np.mean(values))
            if len(values) > 1 and np.std(values) > 0:
                low, high = stats.t.interval(confidence, len(values) - 1, loc=mean, scale=stats.sem(values))
            else:
                low, high = mean, mean
            row |= {f"{metric}_mean": mean, f"{metric}_ci_low": float(low), f"{metric}_ci_high": float(high)}
        rows.append(row)
    return pd.DataFrame(rows)
