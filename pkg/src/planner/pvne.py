import re
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from model.application import Application, is_forbidden
from model.problem.exception import ValidationProblem
from model.substrate import SubstrateNetwork
from planner.aggregation import AggregateRequest
from planner.config import PlanConfig

_LP_UNSAFE = re.compile(r"[^A-Za-z0-9_.()\[\]{}!#$%&/,;?@'`|~]")


@dataclass
class AggregateBlock:
    """Variable indexes belonging to one aggregate."""

    key: tuple[str, str]
    demand: float
    psi: float
    root_index: int
    nodes: dict[tuple[str, str], int] = field(default_factory=dict)
    flows: dict[tuple[str, str, str], int] = field(default_factory=dict)
    quantiles: list[int] = field(default_factory=list)


@dataclass
class LPModel:
    """
    Solver-independent description of the planning LP:

        minimise    cost @ x
        subject to  A_eq @ x == b_eq,  A_ub @ x <= b_ub,  lower <= x <= upper
    """

    names: list[str] = field(default_factory=list)
    lower: list[float] = field(default_factory=list)
    upper: list[float] = field(default_factory=list)
    cost: list[float] = field(default_factory=list)
    eq_rows: list[tuple[str, dict[int, float], float]] = field(default_factory=list)
    ub_rows: list[tuple[str, dict[int, float], float]] = field(default_factory=list)
    blocks: list[AggregateBlock] = field(default_factory=list)
    index: dict[str, int] = field(default_factory=dict)
    capacity_rows: dict[str, int] = field(default_factory=dict)

    @property
    def size(self) -> int:
        return len(self.names)

    def add_variable(self, name: str, lower: float, upper: float, cost: float) -> int:
        if name in self.index:
            raise ValidationProblem(detail=f"Duplicate LP variable '{name}'.")
        self.index[name] = len(self.names)
        self.names.append(name)
        self.lower.append(lower)
        self.upper.append(upper)
        self.cost.append(cost)
        return self.index[name]

    @staticmethod
    def _matrix(rows: list[tuple[str, dict[int, float], float]], columns: int) -> tuple[sparse.csr_matrix, np.ndarray]:
        data, row_ids, col_ids = [], [], []
        for r, (_, coefficients, _) in enumerate(rows):
            for c, value in coefficients.items():
                row_ids.append(r)
                col_ids.append(c)
                data.append(value)
        matrix = sparse.coo_matrix((data, (row_ids, col_ids)), shape=(len(rows), columns)).tocsr()
        return matrix, np.array([rhs for _, _, rhs in rows], dtype=float)

    def equality(self) -> tuple[sparse.csr_matrix, np.ndarray]:
        return self._matrix(self.eq_rows, self.size)

    def inequality(self) -> tuple[sparse.csr_matrix, np.ndarray]:
        return self._matrix(self.ub_rows, self.size)

    def bounds(self) -> np.ndarray:
        return np.column_stack((np.array(self.lower, dtype=float), np.array(self.upper, dtype=float)))

    def objective(self, x: np.ndarray) -> float:
        return float(np.dot(np.array(self.cost, dtype=float), x)) if self.size else 0.0

    def violations(self, x: np.ndarray, tolerance: float = 1e-6) -> list[tuple[str, float]]:
        """Every bound or constraint that `x` breaks by more than `tolerance`, with the amount."""
        x = np.asarray(x, dtype=float)
        broken = []
        for i, name in enumerate(self.names):
            if x[i] < self.lower[i] - tolerance:
                broken.append((f"lower:{name}", self.lower[i] - x[i]))
            if x[i] > self.upper[i] + tolerance:
                broken.append((f"upper:{name}", x[i] - self.upper[i]))
        for name, coefficients, rhs in self.eq_rows:
            gap = abs(sum(v * x[c] for c, v in coefficients.items()) - rhs)
            if gap > tolerance:
                broken.append((name, gap))
        for name, coefficients, rhs in self.ub_rows:
            excess = sum(v * x[c] for c, v in coefficients.items()) - rhs
            if excess > tolerance:
                broken.append((name, excess))
        return broken

    def to_lp_text(self) -> str:
        """The model in CPLEX LP format, for inspection with external LP engines."""

        def safe(name: str) -> str:
            return _LP_UNSAFE.sub("_", name)

        def expression(coefficients: dict[int, float]) -> str:
            terms = [f"{'-' if v < 0 else '+'} {abs(v):.12g} {safe(self.names[c])}" for c, v in coefficients.items()]
            if not terms:
                return f"0 {safe(self.names[0])}" if self.names else "0"
            text = " ".join(terms)
            return text[2:] if text.startswith("+ ") else text

        lines = ["\\ planning LP", "Minimize", f" obj: {expression(dict(enumerate(self.cost)))}", "Subject To"]
        for name, coefficients, rhs in self.eq_rows:
            lines.append(f" {safe(name)}: {expression(coefficients)} = {rhs:.12g}")
        for name, coefficients, rhs in self.ub_rows:
            lines.append(f" {safe(name)}: {expression(coefficients)} <= {rhs:.12g}")
        lines.append("Bounds")
        for name, low, high in zip(self.names, self.lower, self.upper):
            lines.append(f" {low:.12g} <= {safe(name)} <= {high:.12g}")
        lines.append("End")
        return "\n".join(lines) + "\n"


def build_pvne(
    substrate: SubstrateNetwork,
    aggregates: tuple[AggregateRequest, ...],
    applications: dict[str, Application],
    config: PlanConfig,
) -> LPModel:
    """
    Node variables y(q, s) give the fraction of an aggregate whose virtual node q sits on
    substrate node s; flow variables f(l, u, v) the fraction of virtual link l crossing arc u->v;
    quantile variables z(p) in [0, 1/P] the rejected slices, priced p times the rejection factor.
    Aggregates with zero expected demand carry no load and are left out.
    """
    model = LPModel()
    costs = substrate.unit_costs
    checked: set[str] = set()
    capacity_terms: dict[int, dict[int, float]] = {i: {} for i in range(substrate.size)}

    for number, aggregate in enumerate(aggregates):
        app_id, origin = aggregate.key
        if app_id not in applications:
            raise ValidationProblem(detail=f"Aggregate references unknown application '{app_id}'.")
        if origin not in substrate.node_by_id:
            raise ValidationProblem(detail=f"Aggregate references unknown origin '{origin}'.")
        if aggregate.expected_demand <= 0:
            continue
        app = applications[app_id]
        if app_id not in checked:
            app.check_efficiency(substrate)
            checked.add(app_id)
        demand = aggregate.expected_demand
        prefix = f"a{number}"

        def place(virtual: str, element: str, name: str) -> int:
            eta = app.eta(virtual, element)
            s = substrate.index[element]
            if is_forbidden(eta):
                return model.add_variable(name, 0.0, 0.0, 0.0)
            load = demand * app.size_of(virtual) * eta
            i = model.add_variable(name, 0.0, 1.0, load * costs[s])
            if load > 0:
                capacity_terms[s][i] = capacity_terms[s].get(i, 0.0) + load
            return i

        block = AggregateBlock(key=aggregate.key, demand=demand, psi=aggregate.psi, root_index=-1)
        for q in app.topological_order:
            for node in substrate.nodes:
                name = f"y[{prefix}][{q}][{node.id}]"
                if q == app.root:
                    upper = 1.0 if node.id == origin else 0.0
                    block.nodes[(q, node.id)] = model.add_variable(name, 0.0, upper, 0.0)
                else:
                    block.nodes[(q, node.id)] = place(q, node.id, name)
        block.root_index = block.nodes[(app.root, origin)]

        for link in app.ordered_links:
            for tail, head, link_id in substrate.arcs:
                name = f"f[{prefix}][{link.id}][{tail}>{head}]"
                block.flows[(link.id, tail, head)] = place(link.id, link_id, name)

        step = 1.0 / config.quantiles
        for p in range(1, config.quantiles + 1):
            block.quantiles.append(model.add_variable(f"z[{prefix}][{p}]", 0.0, step, aggregate.psi * demand * p))

        complement = {block.root_index: 1.0} | {i: 1.0 for i in block.quantiles}
        model.eq_rows.append((f"allocate[{prefix}]", complement, 1.0))

        for link in app.ordered_links:
            for node in substrate.nodes:
                row: dict[int, float] = {}
                for tail, head, _ in substrate.out_arcs[node.id]:
                    row[block.flows[(link.id, tail, head)]] = 1.0
                    row[block.flows[(link.id, head, tail)]] = -1.0
                row[block.nodes[(link.parent, node.id)]] = row.get(block.nodes[(link.parent, node.id)], 0.0) - 1.0
                row[block.nodes[(link.child, node.id)]] = row.get(block.nodes[(link.child, node.id)], 0.0) + 1.0
                model.eq_rows.append((f"conserve[{prefix}][{link.id}][{node.id}]", row, 0.0))

        model.blocks.append(block)

    for s, terms in capacity_terms.items():
        if terms:
            element_id = substrate.element_ids[s]
            model.capacity_rows[element_id] = len(model.ub_rows)
            model.ub_rows.append((f"capacity[{element_id}]", terms, float(substrate.capacities[s])))
    return model


def element_loads(model: LPModel, x: np.ndarray, substrate: SubstrateNetwork) -> np.ndarray:
    """Load on every substrate element implied by a solution vector."""
    loads = np.zeros(substrate.size)
    for element_id, row in model.capacity_rows.items():
        _, coefficients, _ = model.ub_rows[row]
        loads[substrate.index[element_id]] = sum(v * x[c] for c, v in coefficients.items())
    return loads
