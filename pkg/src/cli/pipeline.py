"""
Pipeline stages shared by the subcommands. Artifacts live under the output directory:

    substrate.json
    seed-<s>/applications.json
    seed-<s>/util-<u>/trace.csv (+ trace.meta.json), plan.json, plan.lp
    seed-<s>/util-<u>/events-<ALGO>.csv, slots-<ALGO>.csv
    results.csv, summary.csv
"""

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from baselines.runners import Algorithm, simulate
from config import environment_loader, logging_configurator, traceability
from config.experiment_config import ExperimentConfig
from metrics.costs import application_psi
from metrics.report import append_results, build_report, completed_cells, read_results, summarize
from model.application import Application
from model.request import Request
from model.substrate import SubstrateNetwork
from planner.plan import Plan
from planner.planning import build_plan
from workload import io
from workload.applications import gen_applications, mean_footprint
from workload.topology import build_topology
from workload.trace import Trace, gen_mmpp_trace
from workload.utilization import scale_to_utilization

LOGGER = logging_configurator.logger(__name__)

SYSTEM = "olive"


@dataclass(frozen=True)
class Cell:
    algorithm: Algorithm
    seed: int
    utilization: float

    @property
    def key(self) -> tuple[str, int, float]:
        return self.algorithm.value, self.seed, round(self.utilization, 6)


def substrate_path(config: ExperimentConfig) -> Path:
    return config.output_dir / "substrate.json"


def seed_dir(config: ExperimentConfig, seed: int) -> Path:
    return config.output_dir / f"seed-{seed}"


def cell_dir(config: ExperimentConfig, seed: int, utilization: float) -> Path:
    return seed_dir(config, seed) / f"util-{utilization:g}"


def results_path(config: ExperimentConfig) -> Path:
    return config.output_dir / "results.csv"


def streams(seed: int) -> dict[str, np.random.Generator]:
    """Independent generators per stage, all derived from the experiment seed."""
    names = ("applications", "trace", "plan_trace", "shift")
    children = np.random.SeedSequence(seed).spawn(len(names))
    return {name: np.random.default_rng(child) for name, child in zip(names, children)}


def gen_topology(config: ExperimentConfig) -> Path:
    substrate = build_topology(config.topology)
    return io.write_json(substrate, substrate_path(config))


def _trace_at(
    config: ExperimentConfig,
    substrate: SubstrateNetwork,
    applications: tuple[Application, ...],
    utilization: float,
    seed: int,
    rng: np.random.Generator,
) -> Trace:
    footprint = mean_footprint(applications, config.trace.app_weights)
    spec = scale_to_utilization(config.trace, utilization / 100, substrate, footprint)
    return gen_mmpp_trace(spec.model_copy(update={"seed": seed}), rng, substrate, applications)


def gen_traces(config: ExperimentConfig) -> list[Path]:
    """Applications per seed and one trace per (seed, utilization); an external trace file is copied as is."""
    substrate = io.load_substrate(substrate_path(config))
    written = []
    for seed in config.seeds:
        rng = streams(seed)
        applications = gen_applications(
            config.applications.model_copy(update={"seed": seed}), rng["applications"], substrate
        )
        written.append(io.write_applications(applications, seed_dir(config, seed) / "applications.json"))
        for utilization in config.utilizations:
            if config.trace_file is not None:
                trace = io.load_trace_csv(config.trace_file)
            else:
                trace = _trace_at(config, substrate, applications, utilization, seed, streams(seed)["trace"])
            written.append(io.write_trace_csv(trace, cell_dir(config, seed, utilization) / "trace.csv"))
    return written


def shift_origins(history: tuple[Request, ...], substrate: SubstrateNetwork, rng: np.random.Generator):
    """Move every request to another edge node, the same one for all requests of an origin."""
    edges = [node.id for node in substrate.edge_nodes]
    if len(edges) < 2:
        return history
    order = [edges[i] for i in rng.permutation(len(edges))]
    moved = {node: order[(k + 1) % len(order)] for k, node in enumerate(order)}
    return tuple(r.model_copy(update={"origin": moved[r.origin]}) for r in history)


def planning_history(
    config: ExperimentConfig,
    substrate: SubstrateNetwork,
    applications: tuple[Application, ...],
    trace: Trace,
    seed: int,
) -> tuple[Request, ...]:
    history = trace.history()
    if config.plan_utilization is not None and config.trace_file is None:
        rng = streams(seed)["plan_trace"]
        history = _trace_at(config, substrate, applications, config.plan_utilization, seed, rng).history()
    if config.shift_plan_origins:
        history = shift_origins(history, substrate, streams(seed)["shift"])
    return history


def plan_cell(config: ExperimentConfig, seed: int, utilization: float) -> Path:
    substrate = io.load_substrate(substrate_path(config))
    applications = io.load_applications(seed_dir(config, seed) / "applications.json")
    directory = cell_dir(config, seed, utilization)
    trace = io.load_trace_csv(directory / "trace.csv")
    history = planning_history(config, substrate, applications, trace, seed)

    plan_config = config.plan.model_copy(update={"seed": seed})
    with traceability.traced_cell(SYSTEM, "PLAN", seed, utilization):
        plan = build_plan(
            substrate,
            applications,
            history,
            plan_config,
            history_slots=trace.history_slots,
            lp_export=directory / "plan.lp",
        )
    return io.write_json(plan, directory / "plan.json")


def plan_all(config: ExperimentConfig) -> list[Path]:
    return [plan_cell(config, seed, u) for seed in config.seeds for u in config.utilizations]


def run_cell(config: ExperimentConfig, cell: Cell) -> dict:
    """Simulate one cell, write its event log and per-slot demand, and return its results row."""
    with traceability.traced_cell(SYSTEM, cell.algorithm.value, cell.seed, cell.utilization):
        substrate = io.load_substrate(substrate_path(config))
        applications = io.load_applications(seed_dir(config, cell.seed) / "applications.json")
        directory = cell_dir(config, cell.seed, cell.utilization)
        trace = io.load_trace_csv(directory / "trace.csv")
        plan: Plan | None = None
        if cell.algorithm == Algorithm.OLIVE:
            plan = io.load_plan(directory / "plan.json")

        result = simulate(
            cell.algorithm,
            substrate,
            applications,
            trace,
            plan=plan,
            plan_config=config.plan.model_copy(update={"seed": cell.seed}),
            fullg_budget=config.fullg_budget,
        )
        report = build_report(
            result,
            application_psi(applications, substrate, config.plan.psi),
            [app.id for app in applications],
            cell.seed,
            cell.utilization,
            config.window,
        )
        result.events.write_csv(directory / f"events-{cell.algorithm.value}.csv")
        report.per_slot.to_csv(directory / f"slots-{cell.algorithm.value}.csv", index=False)
        return report.row()


def _init_worker() -> None:
    environment_loader.init()
    logging_configurator.init()


def pending_cells(config: ExperimentConfig) -> list[Cell]:
    done = completed_cells(read_results(results_path(config)))
    cells = [
        Cell(algorithm, seed, utilization)
        for utilization in config.utilizations
        for seed in config.seeds
        for algorithm in config.algorithms
    ]
    return [cell for cell in cells if cell.key not in done]


def simulate_all(config: ExperimentConfig) -> int:
    """
    Run every cell missing from results.csv. Workers only compute; this process appends each row
    in submission order, so an interrupted sweep resumes where it stopped.
    """
    cells = pending_cells(config)
    started = time.perf_counter()
    LOGGER.info("Simulating", extra={"cells": len(cells), "workers": config.workers})
    if config.workers == 1 or len(cells) <= 1:
        for cell in cells:
            append_results(results_path(config), [run_cell(config, cell)])
    else:
        with ProcessPoolExecutor(max_workers=config.workers, initializer=_init_worker) as pool:
            futures = [pool.submit(run_cell, config, cell) for cell in cells]
            for future in futures:
                append_results(results_path(config), [future.result()])
    LOGGER.info(
        "Simulation finished",
        extra={"cells": len(cells), "duration_ms": round((time.perf_counter() - started) * 1000)},
    )
    return len(cells)


def report(config: ExperimentConfig) -> pd.DataFrame:
    summary = summarize(read_results(results_path(config)))
    path = config.output_dir / "summary.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    summary.to_csv(path, index=False)
    return summary


def run_all(config: ExperimentConfig) -> pd.DataFrame:
    gen_topology(config)
    gen_traces(config)
    if Algorithm.OLIVE in config.algorithms:
        plan_all(config)
    simulate_all(config)
    return report(config)
