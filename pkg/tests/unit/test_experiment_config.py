import json

import pytest

from baselines.runners import Algorithm
from config.experiment_config import ExperimentConfig, parse_floats, parse_seeds
from model.problem.exception import MissingArtifactProblem, ValidationProblem


@pytest.mark.parametrize(
    "text, seeds",
    [("3", (3,)), ("0,2,5", (0, 2, 5)), ("0-4", (0, 1, 2, 3, 4)), ("1-2, 7", (1, 2, 7)), ("", ())],
)
def test_should_parse_seed_lists_and_ranges(text, seeds):
    assert parse_seeds(text) == seeds


def test_should_refuse_unreadable_seeds():
    with pytest.raises(ValidationProblem):
        parse_seeds("one")


def test_should_parse_utilization_lists():
    assert parse_floats("60, 100,140") == (60.0, 100.0, 140.0)


def test_should_default_to_a_desk_sized_experiment():
    config = ExperimentConfig.load()
    assert config.topology.preset == "tiered-10"
    assert config.algorithms == (Algorithm.OLIVE, Algorithm.QUICKG, Algorithm.SLOTOFF)
    assert (config.seeds, config.utilizations, config.workers) == ((0,), (100.0,), 1)


def test_should_read_sections_from_referenced_files(tmp_path):
    (tmp_path / "trace.json").write_text(json.dumps({"history_slots": 40, "test_slots": 30, "rate": 0.5}))
    path = tmp_path / "experiment.json"
    path.write_text(json.dumps({"trace": "trace.json", "algorithms": "olive,fullg"}))

    config = ExperimentConfig.load(path)

    assert (config.trace.history_slots, config.trace.rate) == (40, 0.5)
    assert config.algorithms == (Algorithm.OLIVE, Algorithm.FULLG)


def test_should_let_the_environment_override_the_file(tmp_path, monkeypatch):
    path = tmp_path / "experiment.json"
    path.write_text(json.dumps({"seeds": [0], "workers": 1}))
    monkeypatch.setenv("OLIVE_SEEDS", "0-2")
    monkeypatch.setenv("OLIVE_WORKERS", "3")
    monkeypatch.setenv("OLIVE_OUTPUT_DIR", str(tmp_path / "out"))

    config = ExperimentConfig.load(path)

    assert config.seeds == (0, 1, 2)
    assert config.workers == 3
    assert config.output_dir == tmp_path / "out"


def test_should_let_flags_override_the_environment(monkeypatch):
    monkeypatch.setenv("OLIVE_SEEDS", "0-2")
    assert ExperimentConfig.load(seeds=(9,), utilizations=None).seeds == (9,)


@pytest.mark.parametrize(
    "document",
    [{"seeds": [1, 1]}, {"seeds": []}, {"utilizations": [10]}, {"utilizations": [250]}, {"algorithms": "annealing"}],
    ids=["repeated seed", "no seed", "utilization too low", "utilization too high", "unknown algorithm"],
)
def test_should_refuse_invalid_experiments(document):
    with pytest.raises(ValidationProblem):
        ExperimentConfig.model_validate(document)


@pytest.mark.parametrize("document", [{"trace": "absent.json"}, {"trace_file": "absent.csv"}])
def test_should_report_missing_referenced_files(tmp_path, document):
    path = tmp_path / "experiment.json"
    path.write_text(json.dumps(document))
    with pytest.raises(MissingArtifactProblem):
        ExperimentConfig.load(path)


def test_should_report_a_missing_config_file(tmp_path):
    with pytest.raises(MissingArtifactProblem):
        ExperimentConfig.load(tmp_path / "absent.json")
