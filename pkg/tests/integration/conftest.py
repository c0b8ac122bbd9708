import pytest

from integration.utils import given_a_config_file


@pytest.fixture
def config_file(tmp_path):
    return given_a_config_file(tmp_path)
