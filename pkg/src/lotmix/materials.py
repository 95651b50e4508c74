"""Lot-rounding of material needs and the lot-quantized profit.

Materials are purchasable only in whole lots.  Given a schedule's fractional
per-period lot needs, the per-material chain buys the ceiling of the first
period's need, carries the unused fraction forward, nets it against the next
period's need, and repeats.  A purchase is never negative: when carried
leftover already covers a period, nothing is bought and the surplus carries
on.  Values within ``SNAP_TOL`` of an integer are treated as that integer
before the ceiling so representation noise cannot trigger a spurious lot.

``true profit`` = the fractional-cost profit with the material term replaced
by the cost of the lots actually purchased.  Heuristic, pricing and search
all evaluate it through the same function, so they agree bit for bit.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    InfeasibleInstanceError,
    LimitExceededError,
    PlanMismatchError,
    UtilizationWarning,
    ValidationError,
)
from .instance import Instance
from .milp import MilpConfig, solve_milp
from .schedule import (
    ProductionSchedule,
    ProfitBreakdown,
    _base_terms,
    build_linear_model,
    material_requirements,
    require_feasible,
    schedule_from_model_values,
)

#: Near-integer snap tolerance applied before each ceiling.
SNAP_TOL = 1e-9


@dataclass
class PurchasePlan:
    """Per material (rows) and period (columns), all in lots."""

    fractional_need: np.ndarray
    purchased_lots: np.ndarray
    leftover: np.ndarray
    updated_need: np.ndarray


@dataclass
class HeuristicSolution:
    schedule: ProductionSchedule
    plan: PurchasePlan
    model_profit: float
    updated_profit: float
    breakdown: ProfitBreakdown


def fractional_lots(inst: Instance, sched: ProductionSchedule) -> np.ndarray:
    """Fractional lots of each material needed per period."""
    req = material_requirements(inst, sched)
    if inst.dims.n_materials == 0:
        return req
    return req / inst.lot_weight[:, None]


def _snap(values: np.ndarray) -> np.ndarray:
    rounded = np.round(values)
    return np.where(np.abs(values - rounded) <= SNAP_TOL, rounded, values)


def _chain(fractional_need: np.ndarray):
    """Run the per-material purchase chain (vectorized across materials)."""
    m, q = fractional_need.shape
    purchased = np.zeros((m, q))
    leftover = np.zeros((m, q))
    updated = np.zeros((m, q))
    carry = np.zeros(m)
    for t in range(q):
        net = fractional_need[:, t] - carry
        updated[:, t] = net
        buy = np.maximum(0.0, np.ceil(_snap(net)))
        carry = carry + buy - fractional_need[:, t]
        # Snapping can leave a -1e-9-ish phantom deficit; it is not a real one.
        carry[(carry < 0) & (carry >= -SNAP_TOL)] = 0.0
        purchased[:, t] = buy
        leftover[:, t] = carry
    return purchased, leftover, updated


def purchase_plan(fractional_need: np.ndarray) -> PurchasePlan:
    """Convert fractional lot needs into whole-lot purchases with carry-over."""
    need = np.asarray(fractional_need, dtype=float)
    if need.ndim != 2:
        raise ValidationError(f"fractional need must be 2-D, got shape {need.shape}")
    if np.any(need < 0):
        j, t = np.argwhere(need < 0)[0]
        raise ValidationError(f"fractional need [{j}][{t}] = {need[j, t]} is negative")
    purchased, leftover, updated = _chain(need)
    return PurchasePlan(
        fractional_need=need.copy(),
        purchased_lots=purchased,
        leftover=leftover,
        updated_need=updated,
    )


def _true_terms(inst: Instance, x: np.ndarray):
    """(revenue, material_cost, inventory_cost, variable_cost, fixed_cost,
    utilization) under lot-quantized purchasing.  No feasibility checks."""
    revenue, inventory_cost, variable_cost, fixed_cost = _base_terms(inst, x)
    if inst.dims.n_materials == 0:
        return revenue, 0.0, inventory_cost, variable_cost, fixed_cost, 1.0
    req = inst.consumption @ x
    purchased, _, _ = _chain(req / inst.lot_weight[:, None])
    lots_per_material = purchased.sum(axis=1)
    material_cost = float((inst.material_price * inst.lot_weight) @ lots_per_material)
    purchased_kg = float(inst.lot_weight @ lots_per_material)
    consumed_kg = float(req.sum())
    utilization = consumed_kg / purchased_kg if purchased_kg > 0 else 1.0
    return revenue, material_cost, inventory_cost, variable_cost, fixed_cost, utilization


def true_profit_value(inst: Instance, x: np.ndarray) -> float:
    """Lot-quantized profit of a schedule matrix, no checks (search hot path)."""
    revenue, material, inventory, variable, fixed, _ = _true_terms(inst, x)
    return revenue - material - inventory - variable - fixed


def _breakdown(inst: Instance, x: np.ndarray) -> ProfitBreakdown:
    revenue, material, inventory, variable, fixed, utilization = _true_terms(inst, x)
    if utilization < inst.utilization_floor:
        warnings.warn(
            f"material utilization {utilization:.4f} is below the floor "
            f"{inst.utilization_floor:.2f}",
            UtilizationWarning,
            stacklevel=3,
        )
    return ProfitBreakdown(
        revenue=revenue,
        material_cost=material,
        inventory_cost=inventory,
        variable_cost=variable,
        fixed_cost=fixed,
        profit=revenue - material - inventory - variable - fixed,
        utilization=utilization,
    )


def updated_profit(
    inst: Instance, sched: ProductionSchedule, plan: PurchasePlan
) -> ProfitBreakdown:
    """Profit with materials priced at the plan's whole-lot purchases.

    The plan must have been derived from this schedule; a mismatch beyond
    1e-9 lots raises :class:`PlanMismatchError`.
    """
    require_feasible(inst, sched)
    recomputed = fractional_lots(inst, sched)
    if recomputed.shape != plan.fractional_need.shape or np.any(
        np.abs(recomputed - plan.fractional_need) > 1e-9
    ):
        raise PlanMismatchError("purchase plan does not match the schedule's material needs")
    return _breakdown(inst, sched.x)


def run_heuristic(inst: Instance, cfg: MilpConfig | None = None) -> HeuristicSolution:
    """Integer master schedule via branch and bound, then lot rounding."""
    cfg = cfg or MilpConfig()
    outcome = solve_milp(build_linear_model(inst, integer=True), cfg)
    if outcome.status == "infeasible":
        raise InfeasibleInstanceError("integer master-schedule model is infeasible")
    if outcome.objective is None:
        raise LimitExceededError(
            f"branch and bound stopped with status '{outcome.status}' and no incumbent"
        )
    sched = schedule_from_model_values(inst, outcome.values, integer_mode=True)
    plan = purchase_plan(fractional_lots(inst, sched))
    breakdown = updated_profit(inst, sched, plan)
    return HeuristicSolution(
        schedule=sched,
        plan=plan,
        model_profit=outcome.objective,
        updated_profit=breakdown.profit,
        breakdown=breakdown,
    )
