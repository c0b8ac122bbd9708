import json
from pathlib import Path

import pandas as pd

from main import main

# Small enough for a desk run: 6 edge nodes at half an arrival per slot, 40 history and 30 test slots.
TINY_EXPERIMENT = {
    "name": "tiny",
    "topology": {"preset": "tiered-10"},
    "trace": {"history_slots": 40, "test_slots": 30, "rate": 0.5, "duration_mean": 5},
    "plan": {"resamples": 100, "quantiles": 4},
    "window": {"start": 0, "end": 30},
    "seeds": [0],
    "utilizations": [100],
    "algorithms": ["OLIVE", "QUICKG", "SLOTOFF"],
}


def given_a_config_file(directory: Path, **changes) -> Path:
    document = TINY_EXPERIMENT | {"output_dir": str(directory / "out")} | changes
    path = directory / "experiment.json"
    path.write_text(json.dumps(document, indent=2))
    return path


def given_a_command(*argv: str) -> int:
    return main(list(argv))


def given_the_results(out: Path) -> pd.DataFrame:
    return pd.read_csv(out / "results.csv")


def given_the_problem_printed(err: str) -> dict:
    """The problem document is the last JSON line on stderr; log lines may precede it."""
    for line in reversed(err.strip().splitlines()):
        try:
            document = json.loads(line)
        except json.JSONDecodeError:
            continue
        if isinstance(document, dict) and "exit_code" in document:
            return document
    raise AssertionError(f"No problem document on stderr:\n{err}")
