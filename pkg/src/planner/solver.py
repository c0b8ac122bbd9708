import time
from dataclasses import dataclass
from typing import Protocol

import numpy as np
from scipy.optimize import linprog

from config import logging_configurator
from model.problem.exception import SolverProblem
from planner.pvne import LPModel

LOGGER = logging_configurator.logger(__name__)


@dataclass(frozen=True)
class LPSolution:
    x: np.ndarray
    objective: float
    status: str
    solve_ms: float


class LPSolver(Protocol):
    def solve(self, model: LPModel) -> LPSolution: ...


class HighsSolver:
    """Dual simplex from HiGHS, so solutions are basic (vertex) solutions with few nonzeros."""

    def __init__(self, method: str = "highs-ds", tolerance: float = 1e-9) -> None:
        self.method = method
        self.tolerance = tolerance

    def solve(self, model: LPModel) -> LPSolution:
        started = time.perf_counter()
        if model.size == 0:
            return LPSolution(x=np.zeros(0), objective=0.0, status="optimal", solve_ms=0.0)

        a_eq, b_eq = model.equality()
        a_ub, b_ub = model.inequality()
        result = linprog(
            c=np.array(model.cost, dtype=float),
            A_ub=a_ub if a_ub.shape[0] else None,
            b_ub=b_ub if a_ub.shape[0] else None,
            A_eq=a_eq if a_eq.shape[0] else None,
            b_eq=b_eq if a_eq.shape[0] else None,
            bounds=model.bounds(),
            method=self.method,
            options={
                "presolve": True,
                "primal_feasibility_tolerance": self.tolerance,
                "dual_feasibility_tolerance": self.tolerance,
            },
        )
        elapsed = (time.perf_counter() - started) * 1000
        if result.status != 0 or result.x is None:
            raise SolverProblem(
                detail=f"LP solver returned status {result.status}: {result.message}",
                errors=[
                    {
                        "variables": model.size,
                        "equalities": len(model.eq_rows),
                        "inequalities": len(model.ub_rows),
                        "method": self.method,
                    }
                ],
            )
        x = np.clip(result.x, model.bounds()[:, 0], model.bounds()[:, 1])
        return LPSolution(x=x, objective=model.objective(x), status="optimal", solve_ms=elapsed)


def solve_lp(model: LPModel, solver: LPSolver | None = None) -> LPSolution:
    solution = (solver or HighsSolver()).solve(model)
    LOGGER.info(
        "Solved planning LP",
        extra={"variables": model.size, "objective": solution.objective, "solve_ms": round(solution.solve_ms, 3)},
    )
    return solution
