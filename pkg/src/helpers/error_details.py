import traceback
from typing import TypedDict


class ErrorDetails(TypedDict, total=False):
    exception_type: str
    exception_message: str
    exception_stack_trace: str


def create(exc: BaseException, with_stack_trace: bool = True) -> ErrorDetails:
    details = ErrorDetails(
        exception_type=exc.__class__.__name__,
        exception_message=str(exc),
    )
    if with_stack_trace:
        details["exception_stack_trace"] = "".join(
            traceback.format_exception(exc.__class__, exc, exc.__traceback__)
        )
    return details
