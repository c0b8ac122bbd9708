import uuid
from contextlib import contextmanager
from contextvars import ContextVar
from typing import Iterator

import structlog

"""
Also known as a Transit ID, a correlation id ties together every log record emitted while one
simulation cell (algorithm x seed x utilization) is executed, whichever process executes it.
"""
TRACEABILITY_ID_ATTRIBUTE: str = "correlation_id"

_correlation_id: ContextVar[str | None] = ContextVar(TRACEABILITY_ID_ATTRIBUTE, default=None)


@contextmanager
def traced_cell(
    system: str,
    algorithm: str | None = None,
    seed: int | None = None,
    utilization: float | None = None,
    generator: callable = lambda: uuid.uuid4().hex,
) -> Iterator[str]:
    """
    Bind a fresh correlation id and the cell coordinates into structlog's contextvars for the duration
    of the block. Previously bound values are restored on exit.
    """
    correlation_id = generator()
    token = _correlation_id.set(correlation_id)
    bound = {
        TRACEABILITY_ID_ATTRIBUTE: correlation_id,
        "system": system,
        "algorithm": algorithm,
        "seed": seed,
        "utilization": utilization,
    }
    bound = {k: v for k, v in bound.items() if v is not None}
    with structlog.contextvars.bound_contextvars(**bound):
        try:
            yield correlation_id
        finally:
            _correlation_id.reset(token)


def get_correlation_id() -> str:
    return _correlation_id.get() or "NONE"
