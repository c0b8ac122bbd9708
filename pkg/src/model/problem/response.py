from __future__ import annotations

from typing import Optional

from pydantic import ValidationError

from config.environment_loader import Environment
from helpers import error_details
from model.problem.exception import (
    ProblemException,
    ValidationProblem,
    MissingArtifactProblem,
)
from model.problem.schema import Problem


class ProblemReport:
    """Turns whatever a command raised into a problem document and an exit code."""

    def __init__(self, exc: BaseException, instance: Optional[str] = None) -> None:
        self.problem: ProblemException = self.as_problem(exc, instance)

    @property
    def exit_code(self) -> int:
        return self.problem.exit_code

    def render(self) -> str:
        return Problem(**self.problem.to_dict()).model_dump_json(exclude_none=True)

    @staticmethod
    def as_problem(exc: BaseException, instance: Optional[str] = None) -> ProblemException:
        """
        Maps known exceptions to problems.

        Problems pass through untouched (the instance is filled in if missing), pydantic validation
        errors become validation problems carrying the failing locations, missing files become
        missing-artifact problems and anything else is reported as an uncaught problem with the
        stack trace attached.
        """
        match exc:
            case ProblemException():
                if instance and not exc.instance:
                    exc.instance = instance
                return exc
            case ValidationError():
                return ValidationProblem(
                    detail="One or more user-provided parameters are invalid, please see errors for details.",
                    instance=instance,
                    errors=[
                        {"loc": [str(part) for part in err["loc"]], "msg": err["msg"], "type": err["type"]}
                        for err in exc.errors()
                    ],
                )
            case FileNotFoundError():
                return MissingArtifactProblem(
                    detail=f"Required artifact not found: {exc.filename or exc}",
                    instance=instance,
                )
            case _:
                debugging = Environment.LOG_LEVEL.get().upper() == "DEBUG"
                return ProblemException(
                    _type="problem:uncaught",
                    title="Unexpected Error",
                    detail="Uncaught exception occurred while running the command.",
                    instance=instance,
                    errors=[dict(error_details.create(exc, with_stack_trace=debugging))],
                )
