import json
from pathlib import Path

import pandas as pd
from pydantic import BaseModel, TypeAdapter

from model.application import Application
from model.problem.exception import MissingArtifactProblem, ValidationProblem
from model.request import Request
from model.substrate import SubstrateNetwork
from planner.plan import Plan
from workload.trace import Trace, TraceSpec

TRACE_COLUMNS = ["request_id", "arrival_slot", "duration", "origin", "app", "size"]

_APPLICATIONS = TypeAdapter(tuple[Application, ...])


def _require(path: Path) -> Path:
    if not path.exists():
        raise MissingArtifactProblem(detail=f"Required artifact not found: {path}", instance=str(path))
    return path


def write_json(document: BaseModel, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(document.model_dump_json(indent=2) + "\n")
    return path


def load_substrate(path: Path) -> SubstrateNetwork:
    return SubstrateNetwork.model_validate_json(_require(path).read_text())


def load_plan(path: Path) -> Plan:
    return Plan.model_validate_json(_require(path).read_text())


def write_applications(applications: tuple[Application, ...], path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(_APPLICATIONS.dump_json(applications, indent=2) + b"\n")
    return path


def load_applications(path: Path) -> tuple[Application, ...]:
    return _APPLICATIONS.validate_json(_require(path).read_text())


def meta_path(path: Path) -> Path:
    return path.with_suffix(".meta.json")


def write_trace_csv(trace: Trace, path: Path) -> Path:
    """The trace as CSV plus a `.meta.json` sidecar with the slot split, seed and generating spec."""
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(
        [(r.id, r.arrival, r.duration, r.origin, r.app, r.size) for r in trace.requests],
        columns=TRACE_COLUMNS,
    )
    frame.to_csv(path, index=False)
    meta = {
        "history_slots": trace.history_slots,
        "test_slots": trace.test_slots,
        "seed": trace.seed,
        "spec": None if trace.spec is None else trace.spec.model_dump(mode="json"),
    }
    meta_path(path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return path


def load_trace_csv(path: Path, history_slots: int | None = None, test_slots: int | None = None) -> Trace:
    """
    Read a trace in the documented CSV format. Externally produced traces may come without a
    sidecar; the slot split then defaults to no history and a test period covering every arrival.
    """
    frame = pd.read_csv(_require(path))
    missing = [column for column in TRACE_COLUMNS if column not in frame.columns]
    if missing:
        raise ValidationProblem(detail=f"Trace file {path} lacks columns {missing}.", instance=str(path))

    meta = json.loads(meta_path(path).read_text()) if meta_path(path).exists() else {}
    frame = frame.sort_values(["arrival_slot"], kind="stable")
    requests = tuple(
        Request(
            id=int(rid), app=str(app), origin=str(origin), size=float(size), arrival=int(arrival), duration=int(dur)
        )
        for rid, arrival, dur, origin, app, size in frame[TRACE_COLUMNS].itertuples(index=False, name=None)
    )
    last = max((r.arrival for r in requests), default=-1)
    history = history_slots if history_slots is not None else meta.get("history_slots", 0)
    test = test_slots if test_slots is not None else meta.get("test_slots", max(last + 1 - history, 0))
    spec = TraceSpec.model_validate(meta["spec"]) if meta.get("spec") else None
    return Trace(requests=requests, history_slots=history, test_slots=test, seed=meta.get("seed"), spec=spec)
