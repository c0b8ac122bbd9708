from types import SimpleNamespace

import pandas as pd
import pytest

from cli import pipeline
from engine.replay import replay
from engine.state import EventLog
from integration.utils import given_a_command, given_a_config_file, given_the_problem_printed, given_the_results
from workload import io

CELL = "seed-0/util-100"


def test_should_run_the_whole_pipeline(config_file, tmp_path, capsys):
    out = tmp_path / "out"

    assert given_a_command("run", "--config", str(config_file)) == 0

    results = given_the_results(out)
    assert sorted(results["algorithm"]) == ["OLIVE", "QUICKG", "SLOTOFF"]
    assert (results["resource_cost"] > 0).all()
    assert results["rejection_rate_demand"].between(0, 1).all()
    for artifact in ("substrate.json", "summary.csv", f"{CELL}/plan.json", f"{CELL}/plan.lp", f"{CELL}/trace.csv"):
        assert (out / artifact).exists(), artifact
    assert "OLIVE" in capsys.readouterr().out, "the summary is printed"


def test_should_replay_every_event_log_to_the_same_ledger(config_file, tmp_path):
    out = tmp_path / "out"
    given_a_command("run", "--config", str(config_file))

    substrate = io.load_substrate(out / "substrate.json")
    applications = io.load_applications(out / "seed-0" / "applications.json")
    trace = io.load_trace_csv(out / CELL / "trace.csv")
    for algorithm in ("OLIVE", "QUICKG", "SLOTOFF"):
        events = EventLog.read_csv(out / CELL / f"events-{algorithm}.csv")
        replayed = replay(substrate, applications, trace, events)
        slots = pd.read_csv(out / CELL / f"slots-{algorithm}.csv")
        assert len(slots) == 30
        final_cost = float(replayed.load @ substrate.unit_costs)
        assert final_cost == pytest.approx(slots["resource_cost"].iloc[-1], rel=1e-9), algorithm


def test_should_run_the_stages_one_by_one(config_file, tmp_path):
    for command in ("gen-topology", "gen-trace", "plan", "simulate", "report"):
        assert given_a_command(command, "--config", str(config_file)) == 0, command
    assert len(given_the_results(tmp_path / "out")) == 3


def test_should_only_simulate_missing_cells(config_file, tmp_path, mocker):
    out = tmp_path / "out"
    given_a_command("run", "--config", str(config_file))
    results = given_the_results(out)
    results[results["algorithm"] != "QUICKG"].to_csv(out / "results.csv", index=False)
    run_cell = mocker.spy(pipeline, "run_cell")

    assert given_a_command("simulate", "--config", str(config_file)) == 0

    assert [call.args[1].algorithm.value for call in run_cell.call_args_list] == ["QUICKG"]
    assert len(given_the_results(out)) == 3


def test_should_produce_the_same_results_with_workers_and_reruns(tmp_path, monkeypatch):
    serial = given_a_config_file(tmp_path)
    given_a_command("run", "--config", str(serial))
    monkeypatch.setenv("OLIVE_WORKERS", "2")
    given_a_command("run", "--config", str(serial), "--out", str(tmp_path / "parallel"))

    first = given_the_results(tmp_path / "out").drop(columns="runtime_ms").sort_values("algorithm")
    second = given_the_results(tmp_path / "parallel").drop(columns="runtime_ms").sort_values("algorithm")
    pd.testing.assert_frame_equal(first.reset_index(drop=True), second.reset_index(drop=True))
    for algorithm in ("OLIVE", "QUICKG", "SLOTOFF"):
        events = f"{CELL}/events-{algorithm}.csv"
        assert (tmp_path / "out" / events).read_text() == (tmp_path / "parallel" / events).read_text()


def test_should_exit_3_when_the_config_is_missing(tmp_path, capsys):
    assert given_a_command("run", "--config", str(tmp_path / "absent.json")) == 3
    assert given_the_problem_printed(capsys.readouterr().err)["exit_code"] == 3


def test_should_exit_3_when_the_plan_is_missing(config_file, capsys):
    given_a_command("gen-topology", "--config", str(config_file))
    given_a_command("gen-trace", "--config", str(config_file))

    assert given_a_command("simulate", "--config", str(config_file), "--algos", "OLIVE") == 3

    problem = given_the_problem_printed(capsys.readouterr().err)
    assert problem["type"] == "problem:missing-artifact"
    assert "plan.json" in problem["detail"]


def test_should_exit_2_when_the_solver_fails(config_file, mocker, capsys):
    given_a_command("gen-topology", "--config", str(config_file))
    given_a_command("gen-trace", "--config", str(config_file))
    mocker.patch(
        "planner.solver.linprog",
        return_value=SimpleNamespace(status=2, x=None, message="The problem is infeasible."),
    )

    assert given_a_command("plan", "--config", str(config_file)) == 2
    assert given_the_problem_printed(capsys.readouterr().err)["type"] == "problem:solver"


@pytest.mark.parametrize("flags", [("--util", "10"), ("--algos", "annealing"), ("--seed", "zero")])
def test_should_exit_1_on_invalid_parameters(config_file, capsys, flags):
    assert given_a_command("run", "--config", str(config_file), *flags) == 1
    assert given_the_problem_printed(capsys.readouterr().err)["exit_code"] == 1


def test_should_refuse_unknown_commands():
    with pytest.raises(SystemExit) as exit_info:
        given_a_command("teleport")
    assert exit_info.value.code == 2
