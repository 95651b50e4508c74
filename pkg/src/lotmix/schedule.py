"""Schedule semantics: inventory flows, feasibility, pricing, linear model.

The balance recursion used everywhere is

    stock[i, t] = stock[i, t-1] + production[i, t] - demand[i, t]

with the instance's initial inventory as stock[i, 0] and the convention that
all stock is exhausted at the end of the horizon (terminal-zero).  Holding
cost is charged on start-of-period stock, initial inventory included; that is
the timing that reproduces the case-study inventory-cost arithmetic.

The linear model built here prices materials at their fractional need (no lot
rounding) and omits the schedule-invariant holding charge on initial stock
from its objective, so its constant term is exactly ``-n_periods *
fixed_cost``.  For any feasible schedule,

    model objective = linear_profit(...).profit + holding_cost[0] * initial stock.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleScheduleError, SchemaError, ValidationError
from .instance import Instance

#: Feasibility reporting tolerance (absolute, packages).
FEAS_TOL = 1e-6
#: Integrality reporting tolerance (absolute, packages).
INT_TOL = 1e-9


@dataclass(eq=False)
class ProductionSchedule:
    """Packages to produce per product (rows) and period (columns)."""

    x: np.ndarray
    integer_mode: bool = True

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        if self.x.ndim != 2:
            raise ValidationError(f"schedule matrix must be 2-D, got shape {self.x.shape}")

    def copy(self) -> "ProductionSchedule":
        return ProductionSchedule(self.x.copy(), self.integer_mode)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ProductionSchedule):
            return NotImplemented
        return self.integer_mode == other.integer_mode and np.array_equal(self.x, other.x)


@dataclass
class InventoryTrajectory:
    """End-of-period stock per product and period (unclamped recursion)."""

    i: np.ndarray


@dataclass
class ProfitBreakdown:
    revenue: float
    material_cost: float
    inventory_cost: float
    variable_cost: float
    fixed_cost: float
    profit: float
    utilization: float


@dataclass
class Violation:
    kind: str
    product: int | None
    period: int | None
    amount: float
    message: str


@dataclass
class FeasibilityReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def summary(self) -> str:
        if self.ok:
            return "feasible"
        return "; ".join(v.message for v in self.violations)


def _check_shapes(inst: Instance, sched: ProductionSchedule) -> None:
    want = (inst.dims.n_products, inst.dims.n_periods)
    if sched.x.shape != want:
        raise ValidationError(f"schedule shape {sched.x.shape} does not match instance {want}")


def inventory_trajectory(inst: Instance, sched: ProductionSchedule) -> InventoryTrajectory:
    """Run the balance recursion; negative entries are reported, not raised."""
    _check_shapes(inst, sched)
    flows = np.cumsum(sched.x - inst.demand, axis=1)
    return InventoryTrajectory(inst.initial_inventory[:, None] + flows)


def feasibility_report(
    inst: Instance, sched: ProductionSchedule, tol: float = FEAS_TOL
) -> FeasibilityReport:
    """List every feasibility violation with indices and magnitudes."""
    _check_shapes(inst, sched)
    n, q = sched.x.shape
    report = FeasibilityReport()

    for i, t in np.argwhere(sched.x < -tol):
        report.violations.append(
            Violation(
                "negative-production",
                int(i),
                int(t),
                float(-sched.x[i, t]),
                f"production[{i}][{t}] = {sched.x[i, t]} is negative",
            )
        )

    totals = sched.x.sum(axis=0)
    for t in np.flatnonzero(totals > inst.capacity + tol):
        report.violations.append(
            Violation(
                "capacity",
                None,
                int(t),
                float(totals[t] - inst.capacity[t]),
                f"period {t} production total {totals[t]} exceeds capacity {inst.capacity[t]}",
            )
        )

    stock = inventory_trajectory(inst, sched).i
    for i, t in np.argwhere(stock < -tol):
        report.violations.append(
            Violation(
                "negative-inventory",
                int(i),
                int(t),
                float(-stock[i, t]),
                f"inventory of product {i} is {stock[i, t]} after period {t}",
            )
        )

    for i in np.flatnonzero(np.abs(stock[:, -1]) > tol):
        if stock[i, -1] < -tol:
            continue  # already reported as negative inventory
        report.violations.append(
            Violation(
                "terminal-inventory",
                int(i),
                q - 1,
                float(stock[i, -1]),
                f"product {i} ends the horizon with {stock[i, -1]} packages in stock",
            )
        )

    if sched.integer_mode:
        frac = np.abs(sched.x - np.round(sched.x))
        for i, t in np.argwhere(frac > INT_TOL):
            report.violations.append(
                Violation(
                    "integrality",
                    int(i),
                    int(t),
                    float(frac[i, t]),
                    f"production[{i}][{t}] = {sched.x[i, t]} is not integral",
                )
            )

    return report


def require_feasible(inst: Instance, sched: ProductionSchedule) -> None:
    report = feasibility_report(inst, sched)
    if not report.ok:
        raise InfeasibleScheduleError(f"infeasible schedule: {report.summary()}")


def material_requirements(inst: Instance, sched: ProductionSchedule) -> np.ndarray:
    """Kilograms of each material needed per period (materials x periods)."""
    _check_shapes(inst, sched)
    return inst.consumption @ sched.x


def start_of_period_stocks(inst: Instance, x: np.ndarray) -> np.ndarray:
    """Stock on hand at the start of each period (column 0 = initial inventory)."""
    flows = np.cumsum(x - inst.demand, axis=1)
    end = inst.initial_inventory[:, None] + flows
    return np.hstack([inst.initial_inventory[:, None], end[:, :-1]])


def _base_terms(inst: Instance, x: np.ndarray) -> tuple[float, float, float, float]:
    """(revenue, inventory_cost, variable_cost, fixed_cost) for a schedule."""
    revenue = float(inst.price @ x.sum(axis=1))
    starts = start_of_period_stocks(inst, x)
    inventory_cost = float(inst.holding_cost @ starts.sum(axis=0))
    variable_cost = float(inst.variable_cost * x.sum())
    fixed_cost = float(inst.dims.n_periods * inst.fixed_cost)
    return revenue, inventory_cost, variable_cost, fixed_cost


def linear_profit(inst: Instance, sched: ProductionSchedule) -> ProfitBreakdown:
    """Profit with materials priced at fractional need (no lot rounding)."""
    require_feasible(inst, sched)
    revenue, inventory_cost, variable_cost, fixed_cost = _base_terms(inst, sched.x)
    material_cost = float(inst.material_price @ material_requirements(inst, sched).sum(axis=1))
    profit = revenue - material_cost - inventory_cost - variable_cost - fixed_cost
    return ProfitBreakdown(
        revenue=revenue,
        material_cost=material_cost,
        inventory_cost=inventory_cost,
        variable_cost=variable_cost,
        fixed_cost=fixed_cost,
        profit=profit,
        utilization=1.0,
    )


def _model_objective_unchecked(inst: Instance, x: np.ndarray) -> float:
    """The linear model's objective evaluated directly at a schedule."""
    revenue, _, variable_cost, fixed_cost = _base_terms(inst, x)
    material = float(inst.material_price @ (inst.consumption @ x).sum(axis=1))
    end = inst.initial_inventory[:, None] + np.cumsum(x - inst.demand, axis=1)
    holding = float(inst.holding_cost[1:] @ end[:, :-1].sum(axis=0))
    return revenue - material - holding - variable_cost - fixed_cost


def model_objective(inst: Instance, sched: ProductionSchedule) -> float:
    """Objective value the LP/MILP assigns to a feasible schedule.

    Differs from ``linear_profit(...).profit`` by the constant holding charge
    on initial stock, which no schedule can influence.
    """
    require_feasible(inst, sched)
    return _model_objective_unchecked(inst, sched.x)


# ---------------------------------------------------------------------------
# Generic linear model carrier
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Variable:
    name: str
    lower: float = 0.0
    upper: float = math.inf
    integer: bool = False


@dataclass(frozen=True)
class Constraint:
    name: str
    coeffs: dict[str, float]
    relation: str  # "<=", "=", ">="
    rhs: float


@dataclass
class LinearModel:
    """Maximization model: catalog of bounded variables, linear constraints."""

    variables: list[Variable]
    objective: dict[str, float]
    objective_constant: float
    constraints: list[Constraint]

    def variable_names(self) -> list[str]:
        return [v.name for v in self.variables]

    def validate(self) -> None:
        names = set()
        for v in self.variables:
            if v.name in names:
                raise ValidationError(f"duplicate variable name '{v.name}'")
            names.add(v.name)
            if math.isnan(v.lower) or math.isnan(v.upper):
                raise ValidationError(f"variable '{v.name}' has NaN bounds")
            if v.lower > v.upper:
                raise ValidationError(
                    f"variable '{v.name}' has empty bound interval [{v.lower}, {v.upper}]"
                )
        for name in self.objective:
            if name not in names:
                raise ValidationError(f"objective references unknown variable '{name}'")
        for con in self.constraints:
            if con.relation not in ("<=", "=", ">="):
                raise ValidationError(f"constraint '{con.name}' has relation '{con.relation}'")
            for name in con.coeffs:
                if name not in names:
                    raise ValidationError(
                        f"constraint '{con.name}' references unknown variable '{name}'"
                    )

    def evaluate_objective(self, values: dict[str, float]) -> float:
        return sum(c * values[name] for name, c in self.objective.items()) + self.objective_constant


def x_name(i: int, t: int) -> str:
    return f"x[{i},{t}]"


def inv_name(i: int, t: int) -> str:
    return f"inv[{i},{t}]"


def build_linear_model(
    inst: Instance, integer: bool, tag_inventory: bool = False
) -> LinearModel:
    """Build the capacity/balance model with fractional material pricing.

    Integrality tags go on production variables only; balance equalities then
    keep stock integral for integer-data instances.  ``tag_inventory``
    restores stock tags for non-integer data.
    """
    n, q = inst.dims.n_products, inst.dims.n_periods
    material_rate = inst.material_price @ inst.consumption  # money per package

    variables: list[Variable] = []
    objective: dict[str, float] = {}
    for i in range(n):
        for t in range(q):
            name = x_name(i, t)
            variables.append(Variable(name, 0.0, math.inf, integer))
            objective[name] = float(
                inst.price[i] - inst.variable_cost - (material_rate[i] if len(material_rate) else 0.0)
            )
    for i in range(n):
        for t in range(q):
            name = inv_name(i, t)
            upper = 0.0 if t == q - 1 else math.inf
            variables.append(Variable(name, 0.0, upper, integer and tag_inventory))
            # Stock at end of period t is held through period t+1.
            if t < q - 1:
                objective[name] = -float(inst.holding_cost[t + 1])

    constraints: list[Constraint] = []
    for t in range(q):
        constraints.append(
            Constraint(
                name=f"capacity[{t}]",
                coeffs={x_name(i, t): 1.0 for i in range(n)},
                relation="<=",
                rhs=float(inst.capacity[t]),
            )
        )
    for i in range(n):
        for t in range(q):
            coeffs = {inv_name(i, t): 1.0, x_name(i, t): -1.0}
            if t == 0:
                rhs = float(inst.initial_inventory[i] - inst.demand[i, 0])
            else:
                coeffs[inv_name(i, t - 1)] = -1.0
                rhs = float(-inst.demand[i, t])
            constraints.append(
                Constraint(name=f"balance[{i},{t}]", coeffs=coeffs, relation="=", rhs=rhs)
            )

    return LinearModel(
        variables=variables,
        objective=objective,
        objective_constant=-float(q * inst.fixed_cost),
        constraints=constraints,
    )


def schedule_from_model_values(
    inst: Instance, values: dict[str, float], integer_mode: bool, tol: float = 1e-6
) -> ProductionSchedule:
    """Reassemble a schedule matrix from solver variable values."""
    n, q = inst.dims.n_products, inst.dims.n_periods
    x = np.zeros((n, q))
    for i in range(n):
        for t in range(q):
            x[i, t] = values[x_name(i, t)]
    x[(x < 0) & (x > -1e-9)] = 0.0
    if integer_mode:
        snapped = np.round(x)
        off = np.abs(x - snapped)
        if np.any(off > tol):
            i, t = np.argwhere(off > tol)[0]
            raise ValidationError(
                f"solver value x[{i},{t}] = {x[i, t]} is not integral within {tol}"
            )
        x = snapped
    return ProductionSchedule(x, integer_mode=integer_mode)


# ---------------------------------------------------------------------------
# Schedule documents
# ---------------------------------------------------------------------------


def render_schedule(sched: ProductionSchedule, notes: list[str] | None = None) -> str:
    from .instance import _mat  # canonical number formatting

    doc: dict = {"integer_mode": bool(sched.integer_mode), "production": _mat(sched.x)}
    if notes:
        doc["notes"] = list(notes)
    return json.dumps(doc, indent=2) + "\n"


def parse_schedule(doc: str | dict) -> ProductionSchedule:
    if isinstance(doc, (str, bytes)):
        try:
            data = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"schedule document is not valid JSON: {exc}") from None
    else:
        data = doc
    if not isinstance(data, dict):
        raise SchemaError("schedule document root must be an object")
    if "production" not in data:
        raise SchemaError("schedule document missing field 'production'")
    if "integer_mode" not in data:
        raise SchemaError("schedule document missing field 'integer_mode'")
    if not isinstance(data["integer_mode"], bool):
        raise SchemaError("field 'integer_mode' must be a boolean")
    try:
        x = np.asarray(data["production"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"field 'production' is not numeric: {exc}") from None
    if x.ndim != 2:
        raise SchemaError(f"field 'production' must be 2-D, got shape {x.shape}")
    return ProductionSchedule(x, integer_mode=data["integer_mode"])


def load_schedule(path) -> ProductionSchedule:
    with open(path, encoding="utf-8") as fh:
        return parse_schedule(fh.read())
