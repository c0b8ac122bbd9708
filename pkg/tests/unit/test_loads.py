import pytest

from model.application import FORBIDDEN
from model.loads import cost_rate, element_load, request_loads, unit_loads
from model.problem.exception import InvalidEmbeddingProblem
from tests.helpers import embedding_at, request, single_vnf_app, triangle_substrate


def test_should_load_the_mapped_element_with_size_times_element_size(substrate, app):
    load = element_load(request(size=10), embedding_at("A"), "f1", "A", app, substrate)
    assert load == 500, "x=1, d=10, D=50, eta=1 must load 500"


def test_should_not_load_an_unmapped_element(substrate, app):
    assert element_load(request(size=10), embedding_at("A"), "f1", "B", app, substrate) == 0


def test_should_scale_link_load_by_efficiency(substrate):
    app = single_vnf_app(efficiency=(("u-f1", "A-B", 0.3),))
    load = element_load(request(size=10), embedding_at("B"), "u-f1", "A-B", app, substrate)
    assert load == pytest.approx(150), "an accelerator-shrunk link carries 30% of its nominal load"


def test_should_refuse_a_forbidden_mapping(substrate):
    app = single_vnf_app(efficiency=(("f1", "A", FORBIDDEN),))
    with pytest.raises(InvalidEmbeddingProblem):
        element_load(request(size=10), embedding_at("A"), "f1", "A", app, substrate)


def test_should_charge_every_link_of_a_path(app):
    substrate = triangle_substrate({"A": 50, "B": 1, "C": 1})
    loads = request_loads(request(size=10), app, embedding_at("C", path=("A", "B", "C")), substrate)
    index = substrate.index
    assert loads == {index["C"]: 500, index["A-B"]: 500, index["B-C"]: 500}


def test_should_price_the_cheap_neighbour_at_1000_and_the_origin_at_25000(substrate, app):
    neighbour = request_loads(request(size=10), app, embedding_at("B"), substrate)
    origin = request_loads(request(size=10), app, embedding_at("A"), substrate)
    assert cost_rate(neighbour, substrate) == 1000
    assert cost_rate(origin, substrate) == 25000


def test_should_drop_zero_loads_of_the_root_and_collocated_links(substrate, app):
    loads = unit_loads(app, embedding_at("A"), substrate)
    assert loads == {substrate.index["A"]: 50}, "root and a single-node path consume nothing"
