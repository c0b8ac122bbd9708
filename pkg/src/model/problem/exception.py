import json
from typing import Dict, Optional, Any, List


class ProblemException(Exception):
    """
    A problem-details exception, modelled after RFC 7807 (https://tools.ietf.org/html/rfc7807).

    It is intended to be subclassed to create domain-specific problems which, when raised, are
    trapped by the command line entrypoint and rendered as a JSON document on stderr; the process
    then exits with the problem's `exit_code`.

    Default values are applied to the `type`, `title` and `exit_code` fields if they are left
    unspecified.
    """

    default_type: str = "problem:simulation"
    default_title: str = "Simulation Problem"
    default_exit_code: int = 1

    def __init__(
        self,
        detail: Optional[str] = None,
        _type: Optional[str] = None,
        title: Optional[str] = None,
        exit_code: Optional[int] = None,
        instance: Optional[str] = None,
        errors: Optional[List[Dict[str, Any]]] = None,
    ) -> None:
        super().__init__(detail or title or self.default_title)
        self.type: str = _type or self.default_type
        self.title: str = title or self.default_title
        self.exit_code: int = exit_code if exit_code is not None else self.default_exit_code
        self.detail: Optional[str] = detail
        self.instance: Optional[str] = instance
        self.errors: Optional[List[Dict[str, Any]]] = errors

    def to_bytes(self) -> bytes:
        """
        Render the Problem as JSON-serialized bytes.
        """
        return json.dumps(
            self.to_dict(),
            ensure_ascii=False,
            allow_nan=False,
            indent=None,
            separators=(",", ":"),
        ).encode("utf-8")

    def to_dict(self) -> Dict[str, Any]:
        """
        Get a dictionary representation of the Problem.

        Returns:
            A dictionary representation of the Problem exception. This can be serialized
            out to JSON and printed by the command line entrypoint.
        """
        d = {}

        if self.type:
            d["type"] = str(self.type)
        if self.title:
            d["title"] = str(self.title)
        d["exit_code"] = int(self.exit_code)
        if self.detail:
            d["detail"] = str(self.detail)
        if self.instance:
            d["instance"] = str(self.instance)
        if self.errors:
            d["errors"] = self.errors

        return d

    def __str__(self) -> str:
        return str(f"Problem:<{self.to_dict()}>")

    def __repr__(self) -> str:
        return str(self)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ProblemException):
            return False
        return self.to_dict() == other.to_dict()

    def __hash__(self) -> int:
        return hash(self.to_bytes())


class ValidationProblem(ProblemException):
    """User-provided specs, configs or artifacts failed validation."""

    default_type = "problem:validation"
    default_title = "Validation Error"
    default_exit_code = 1


class TopologyProblem(ValidationProblem):
    default_type = "problem:topology"
    default_title = "Invalid Topology"


class SolverProblem(ProblemException):
    """The LP engine did not return an optimal solution."""

    default_type = "problem:solver"
    default_title = "Solver Failure"
    default_exit_code = 2


class DecompositionProblem(SolverProblem):
    default_type = "problem:decomposition"
    default_title = "Undecomposable Plan"


class MissingArtifactProblem(ProblemException):
    default_type = "problem:missing-artifact"
    default_title = "Missing Artifact"
    default_exit_code = 3


class InvariantViolationProblem(ProblemException):
    """An internal invariant (capacity safety, ledger consistency, plan residual) did not hold."""

    default_type = "problem:invariant"
    default_title = "Invariant Violation"
    default_exit_code = 4


class InvalidEmbeddingProblem(InvariantViolationProblem):
    default_type = "problem:invalid-embedding"
    default_title = "Invalid Embedding"
