import pytest

from config import environment_loader, logging_configurator


@pytest.fixture(scope="session", autouse=True)
def configured_logging():
    environment_loader.init()
    logging_configurator.init()
