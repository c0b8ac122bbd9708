import time
from pathlib import Path
from typing import Iterable

import numpy as np

from config import logging_configurator
from model.application import Application
from model.request import Request
from model.substrate import SubstrateNetwork
from planner.aggregation import AggregateRequest, aggregate_history
from planner.bootstrap import bootstrap_expected_demand
from planner.config import PlanConfig
from planner.decomposition import extract_templates
from planner.plan import Plan
from planner.psi import default_psi
from planner.pvne import build_pvne
from planner.solver import LPSolver, solve_lp

LOGGER = logging_configurator.logger(__name__)


def estimate_aggregates(
    aggregates: tuple[AggregateRequest, ...],
    applications: dict[str, Application],
    substrate: SubstrateNetwork,
    config: PlanConfig,
) -> tuple[AggregateRequest, ...]:
    """Attach the bootstrapped expected demand and the rejection factor to every aggregate."""
    streams = np.random.SeedSequence(config.seed).spawn(len(aggregates))
    estimated = []
    for aggregate, stream in zip(aggregates, streams):
        estimate = bootstrap_expected_demand(aggregate.series, config, np.random.default_rng(stream))
        psi = config.psi if config.psi is not None else default_psi(applications[aggregate.app], substrate)
        estimated.append(
            aggregate.model_copy(
                update={
                    "expected_demand": max(estimate.estimate, 0.0),
                    "ci_low": estimate.low,
                    "ci_high": estimate.high,
                    "psi": psi,
                }
            )
        )
    return tuple(estimated)


def build_plan(
    substrate: SubstrateNetwork,
    applications: tuple[Application, ...],
    history: Iterable[Request],
    config: PlanConfig,
    history_slots: int | None = None,
    solver: LPSolver | None = None,
    lp_export: Path | None = None,
) -> Plan:
    """
    Aggregate the history, estimate expected demands, solve the planning LP and decompose it.
    With `lp_export` the LP is also written there in CPLEX LP format.
    """
    started = time.perf_counter()
    by_id = {app.id: app for app in applications}
    aggregates = aggregate_history(history, slots=history_slots)
    aggregates = estimate_aggregates(aggregates, by_id, substrate, config)
    model = build_pvne(substrate, aggregates, by_id, config)
    if lp_export is not None:
        lp_export.parent.mkdir(parents=True, exist_ok=True)
        lp_export.write_text(model.to_lp_text())
    solution = solve_lp(model, solver)
    plan = extract_templates(model, solution, aggregates, by_id, substrate, config.quantiles, history_slots or 0)
    LOGGER.info(
        "Built plan",
        extra={
            "aggregates": len(plan.aggregates),
            "templates": sum(len(a.templates) for a in plan.aggregates),
            "objective": plan.objective,
            "solve_ms": round(solution.solve_ms, 3),
            "duration_ms": round((time.perf_counter() - started) * 1000, 3),
        },
    )
    return plan
