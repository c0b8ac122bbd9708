import pytest

from model.application import FORBIDDEN
from planner.psi import default_psi
from tests.helpers import chain_app, single_vnf_app, triangle_substrate


@pytest.mark.parametrize(
    "app, psi",
    [
        (single_vnf_app(link_size=0), 2500),
        (single_vnf_app(), 2550),
        (single_vnf_app(efficiency=(("f1", "A", FORBIDDEN),)), 100),
        (single_vnf_app(efficiency=(("f1", "A", 0.5),)), 1300),
    ],
    ids=["node only", "node and link", "costly host forbidden", "costly host efficient"],
)
def test_should_price_every_element_at_its_costliest_host(substrate, app, psi):
    assert default_psi(app, substrate) == pytest.approx(psi)


def test_should_sum_over_the_whole_chain():
    substrate = triangle_substrate({"A": 50, "B": 1, "C": 2})
    app = chain_app(sizes=(10, 20), link_sizes=(1, 2))
    assert default_psi(app, substrate) == pytest.approx(50 * 30 + 3)
