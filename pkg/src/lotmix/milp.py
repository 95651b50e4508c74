"""Branch and bound over the simplex core for integer-tagged models.

Best-bound node selection, branching on the most fractional tagged variable
(ties broken by catalog order), children created by appending floor/ceil
bound rows.  Incumbent objectives are re-evaluated at snapped values so they
never inherit tableau roundoff.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

from .errors import UnboundedModelError, ValidationError
from .schedule import Constraint, LinearModel
from .simplex import solve_lp, to_standard_form


@dataclass(frozen=True)
class MilpConfig:
    integrality_tol: float = 1e-6
    node_limit: int = 100_000
    gap_tol: float = 0.0
    branching: str = "most-fractional"
    node_order: str = "best-bound"
    lp_tol: float = 1e-9

    def __post_init__(self):
        if self.integrality_tol <= 0:
            raise ValidationError("integrality_tol must be positive")
        if self.lp_tol <= 0:
            raise ValidationError("lp_tol must be positive")
        if self.node_limit < 1:
            raise ValidationError("node_limit must be >= 1")
        if self.gap_tol < 0:
            raise ValidationError("gap_tol must be nonnegative")
        if self.branching != "most-fractional":
            raise ValidationError(f"unknown branching rule '{self.branching}'")
        if self.node_order != "best-bound":
            raise ValidationError(f"unknown node order '{self.node_order}'")


@dataclass
class MilpOutcome:
    status: str  # "optimal" | "feasible-gap" | "infeasible" | "node-limit"
    values: dict[str, float] = field(default_factory=dict)
    objective: float | None = None
    best_bound: float = -math.inf
    nodes: int = 0


def _solve_relaxation(model: LinearModel, extra: tuple, lp_tol: float):
    if extra:
        model = LinearModel(
            variables=model.variables,
            objective=model.objective,
            objective_constant=model.objective_constant,
            constraints=model.constraints + list(extra),
        )
    return solve_lp(to_standard_form(model), tol=lp_tol)


def solve_milp(model: LinearModel, cfg: MilpConfig | None = None) -> MilpOutcome:
    """Maximize the model subject to its integrality tags."""
    cfg = cfg or MilpConfig()
    model.validate()
    int_names = [v.name for v in model.variables if v.integer]

    root = _solve_relaxation(model, (), cfg.lp_tol)
    nodes = 1
    if root.status == "infeasible":
        return MilpOutcome("infeasible", nodes=nodes)
    if root.status == "unbounded":
        raise UnboundedModelError("LP relaxation is unbounded")
    if not int_names:
        return MilpOutcome(
            "optimal", root.values, root.objective, best_bound=root.objective, nodes=nodes
        )

    rank = {name: k for k, name in enumerate(int_names)}
    incumbent: dict[str, float] | None = None
    incumbent_value = -math.inf
    counter = 0
    heap: list = [(-root.objective, counter, root, ())]
    status = "optimal"
    best_bound = root.objective

    while heap:
        neg_bound, _, outcome, extra = heapq.heappop(heap)
        bound = -neg_bound
        if incumbent is not None and bound <= incumbent_value + 1e-9:
            best_bound = max(incumbent_value, bound)
            break
        if incumbent is not None and cfg.gap_tol > 0 and bound - incumbent_value <= cfg.gap_tol:
            status = "feasible-gap"
            best_bound = bound
            break

        fracs = {
            name: abs(outcome.values[name] - round(outcome.values[name]))
            for name in int_names
        }
        worst = max(fracs.values())
        if worst <= cfg.integrality_tol:
            snapped = dict(outcome.values)
            for name in int_names:
                snapped[name] = float(round(snapped[name]))
            value = model.evaluate_objective(snapped)
            if value > incumbent_value:
                incumbent = snapped
                incumbent_value = value
            continue

        branch_var = min(
            (name for name, f in fracs.items() if f == worst), key=rank.__getitem__
        )
        v = outcome.values[branch_var]
        children = (
            Constraint(f"branch:{branch_var}<= {math.floor(v)}", {branch_var: 1.0}, "<=", math.floor(v)),
            Constraint(f"branch:{branch_var}>= {math.ceil(v)}", {branch_var: 1.0}, ">=", math.ceil(v)),
        )
        stop = False
        for row in children:
            if nodes >= cfg.node_limit:
                stop = True
                break
            child_extra = extra + (row,)
            child = _solve_relaxation(model, child_extra, cfg.lp_tol)
            nodes += 1
            if child.status == "infeasible":
                continue
            if child.status == "unbounded":
                raise UnboundedModelError("LP relaxation is unbounded")
            if incumbent is None or child.objective > incumbent_value + 1e-9:
                counter += 1
                heapq.heappush(heap, (-child.objective, counter, child, child_extra))
        if stop:
            open_bounds = [-item[0] for item in heap] + [bound]
            best_bound = max([incumbent_value] + open_bounds)
            status = "node-limit"
            break
    else:
        best_bound = incumbent_value if incumbent is not None else -math.inf

    if incumbent is None:
        if status == "node-limit":
            return MilpOutcome("node-limit", {}, None, best_bound, nodes)
        return MilpOutcome("infeasible", nodes=nodes)
    return MilpOutcome(status, incumbent, incumbent_value, best_bound, nodes)
