from model.application import Application, is_forbidden
from model.substrate import SubstrateNetwork


def default_psi(app: Application, substrate: SubstrateNetwork) -> float:
    """Cost of one unit of the application when every element sits on its costliest admissible host."""
    total = 0.0
    for q in (*app.node_by_id, *app.link_by_id):
        hosts = substrate.nodes if not app.is_link(q) else substrate.links
        prices = [h.unit_cost * app.eta(q, h.id) for h in hosts if not is_forbidden(app.eta(q, h.id))]
        total += app.size_of(q) * max(prices, default=0.0)
    return total
