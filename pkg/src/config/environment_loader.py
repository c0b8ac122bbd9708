import os
from enum import Enum

from dotenv import load_dotenv


class Environment(Enum):
    """
    Environment variables read by the simulator, each with its default.

    Values are always returned as strings; callers parse them into the type they need.
    """

    APP_NAME = ("APP_NAME", "OLIVE VNE Simulator")
    APP_VERSION = ("APP_VERSION", "0.1.0")
    NAME = ("ENVIRONMENT", "local")
    LOG_LEVEL = ("LOG_LEVEL", "INFO")
    LOG_JSON_FORMAT = ("LOG_JSON_FORMAT", "false")
    SEEDS = ("OLIVE_SEEDS", "")
    OUTPUT_DIR = ("OLIVE_OUTPUT_DIR", "")
    WORKERS = ("OLIVE_WORKERS", "")

    def __init__(self, variable: str, default: str) -> None:
        self.variable = variable
        self.default = default

    def get(self) -> str:
        return os.environ.get(self.variable, self.default)

    def is_set(self) -> bool:
        return bool(os.environ.get(self.variable))


def init(dotenv_path: str | None = None) -> None:
    """
    Load a `.env` file into the process environment. Variables that are already set win over the file.
    """
    load_dotenv(dotenv_path=dotenv_path, override=False)
