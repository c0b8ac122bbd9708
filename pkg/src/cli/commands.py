import argparse
import sys
from pathlib import Path
from typing import Callable, Sequence

from cli import pipeline
from config import logging_configurator
from config.environment_loader import Environment
from config.experiment_config import ExperimentConfig, parse_floats, parse_seeds
from model.problem.response import ProblemReport
from workload.topology import TopologySpec, preset_names

LOGGER = logging_configurator.logger(__name__)


def _overrides(args: argparse.Namespace) -> dict:
    overrides = {
        "seeds": parse_seeds(args.seed) if args.seed else None,
        "output_dir": args.out,
        "utilizations": parse_floats(args.util) if args.util else None,
        "algorithms": args.algos,
    }
    if getattr(args, "preset", None):
        overrides["topology"] = TopologySpec(preset=args.preset)
    return overrides


def _gen_topology(config: ExperimentConfig) -> None:
    print(pipeline.gen_topology(config))


def _gen_trace(config: ExperimentConfig) -> None:
    for path in pipeline.gen_traces(config):
        print(path)


def _plan(config: ExperimentConfig) -> None:
    for path in pipeline.plan_all(config):
        print(path)


def _simulate(config: ExperimentConfig) -> None:
    pipeline.simulate_all(config)
    print(pipeline.results_path(config))


def _report(config: ExperimentConfig) -> None:
    print(pipeline.report(config).to_string(index=False))


def _run(config: ExperimentConfig) -> None:
    print(pipeline.run_all(config).to_string(index=False))


COMMANDS: dict[str, tuple[Callable[[ExperimentConfig], None], str]] = {
    "gen-topology": (_gen_topology, "build the substrate network"),
    "gen-trace": (_gen_trace, "generate applications and request traces"),
    "plan": (_plan, "solve the offline plan from the history part of each trace"),
    "simulate": (_simulate, "run the algorithms over the test part of each trace"),
    "report": (_report, "summarise results.csv into summary.csv"),
    "run": (_run, "the whole pipeline in one go"),
}


def parser() -> argparse.ArgumentParser:
    root = argparse.ArgumentParser(prog="olive", description=Environment.APP_NAME.get())
    root.add_argument("--version", action="version", version=Environment.APP_VERSION.get())
    commands = root.add_subparsers(dest="command", required=True)
    for name, (_, summary) in COMMANDS.items():
        command = commands.add_parser(name, help=summary)
        command.add_argument("--config", type=Path, help="experiment JSON document")
        command.add_argument("--seed", help="seed, list or range such as 0-29")
        command.add_argument("--out", type=Path, help="output directory")
        command.add_argument("--util", help="comma separated utilizations in percent, e.g. 60,100,140")
        command.add_argument("--algos", help="comma separated algorithms, e.g. OLIVE,QUICKG,SLOTOFF")
        if name in ("gen-topology", "run"):
            command.add_argument("--preset", choices=preset_names(), help="topology preset")
    return root


def main(argv: Sequence[str] | None = None) -> int:
    args = parser().parse_args(argv)
    handler, _ = COMMANDS[args.command]
    try:
        config = ExperimentConfig.load(args.config, **_overrides(args))
        handler(config)
    except Exception as exc:
        report = ProblemReport(exc, instance=f"command:{args.command}")
        LOGGER.error("Command failed", extra={"command": args.command, "exit_code": report.exit_code})
        print(report.render(), file=sys.stderr)
        return report.exit_code
    return 0
