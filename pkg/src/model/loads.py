"""
Per-element resource arithmetic: the load a request puts on a substrate element is
mapped x size x element size x efficiency, summed over the virtual elements using it.
"""

import numpy as np

from model.application import Application, is_forbidden
from model.embedding import Embedding
from model.problem.exception import InvalidEmbeddingProblem
from model.request import Request
from model.substrate import SubstrateNetwork

ElementLoads = dict[int, float]


def element_load(
    request: Request,
    embedding: Embedding,
    virtual: str,
    element: str,
    application: Application,
    substrate: SubstrateNetwork,
) -> float:
    if not embedding.maps(virtual, element, substrate):
        return 0.0
    eta = application.eta(virtual, element)
    if is_forbidden(eta):
        raise InvalidEmbeddingProblem(
            detail=f"'{virtual}' of request {request.id} is mapped to forbidden element '{element}'.",
        )
    return request.size * application.size_of(virtual) * eta


def unit_loads(application: Application, embedding: Embedding, substrate: SubstrateNetwork) -> ElementLoads:
    """Loads per unit of request size, keyed by substrate element index. Zero entries are dropped."""
    loads: ElementLoads = {}

    def add(virtual: str, element: str) -> None:
        eta = application.eta(virtual, element)
        if is_forbidden(eta):
            raise InvalidEmbeddingProblem(
                detail=f"'{virtual}' of application '{application.id}' is mapped to forbidden element '{element}'.",
            )
        amount = application.size_of(virtual) * eta
        if amount > 0:
            index = substrate.index[element]
            loads[index] = loads.get(index, 0.0) + amount

    for virtual, host in embedding.node_map.items():
        add(virtual, host)
    for virtual in embedding.paths:
        for link in embedding.path_links(virtual, substrate):
            add(virtual, link)
    return loads


def scale(loads: ElementLoads, factor: float) -> ElementLoads:
    return {index: amount * factor for index, amount in loads.items()}


def request_loads(
    request: Request, application: Application, embedding: Embedding, substrate: SubstrateNetwork
) -> ElementLoads:
    return scale(unit_loads(application, embedding, substrate), request.size)


def cost_rate(loads: ElementLoads, substrate: SubstrateNetwork) -> float:
    """Resource cost per slot of holding the given loads."""
    costs = substrate.unit_costs
    return float(sum(amount * costs[index] for index, amount in loads.items()))


def as_vector(loads: ElementLoads, size: int) -> np.ndarray:
    vector = np.zeros(size)
    for index, amount in loads.items():
        vector[index] += amount
    return vector
