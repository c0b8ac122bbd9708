from typing import Callable, Iterable, Mapping, NamedTuple

import numpy as np

from model.problem.exception import ValidationProblem
from model.request import Request


class BalanceIndex(NamedTuple):
    value: float
    # True when nothing was rejected and the value 1 is a convention rather than a measurement.
    flagged: bool = False


def rejection_rate(requests: Iterable[Request], rejected: Callable[[Request], bool]) -> tuple[float, float]:
    """(demand weighted, count weighted) share of rejected requests; demand is size times duration."""
    requests = list(requests)
    if not requests:
        raise ValidationProblem(detail="No request arrived inside the measurement window.")
    lost = [r for r in requests if rejected(r)]
    volume = sum(r.volume for r in requests)
    demand_rate = sum(r.volume for r in lost) / volume if volume > 0 else 0.0
    return float(demand_rate), len(lost) / len(requests)


def rejection_counts(
    requests: Iterable[Request], rejected: Callable[[Request], bool]
) -> tuple[dict[str, dict[str, int]], dict[str, int]]:
    """Rejections per (origin, application) and requests per origin."""
    rejections: dict[str, dict[str, int]] = {}
    totals: dict[str, int] = {}
    for request in requests:
        totals[request.origin] = totals.get(request.origin, 0) + 1
        if rejected(request):
            per_app = rejections.setdefault(request.origin, {})
            per_app[request.app] = per_app.get(request.app, 0) + 1
    return rejections, totals


def balance_index(
    rejections: Mapping[str, Mapping[str, int]],
    request_counts: Mapping[str, int],
    applications: Iterable[str],
) -> BalanceIndex:
    """
    Jain's index of the rejections of every application at a node, averaged over the nodes that
    rejected anything and weighted by their number of requests. 1 is a perfect balance, 1/|A| means
    a single application took all rejections at every node.
    """
    applications = list(applications)
    weighted, weights = 0.0, 0
    for node, per_app in rejections.items():
        x = np.array([per_app.get(app, 0) for app in applications], dtype=float)
        squares = float(np.sum(np.square(x)))
        if squares == 0:
            continue
        weighted += request_counts[node] * float(np.sum(x)) ** 2 / (len(applications) * squares)
        weights += request_counts[node]
    if weights == 0:
        return BalanceIndex(1.0, flagged=True)
    return BalanceIndex(weighted / weights)
