import pytest

from tests.helpers import single_vnf_app, two_node_substrate


@pytest.fixture
def substrate():
    return two_node_substrate()


@pytest.fixture
def app():
    return single_vnf_app()


@pytest.fixture
def applications(app):
    return {app.id: app}
