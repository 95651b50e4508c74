"""Exhaustive ground-truth optimizer for tiny integral instances.

Feasible integer production paths are enumerated per product (the balance
recursion and the terminal-zero convention bound each period's choices), and
their cross product is filtered by per-period capacity.  The search-space
size is bounded a priori by the product of per-product path counts, so the
enumeration refuses instances it cannot finish.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleInstanceError, LimitExceededError, ValidationError
from .instance import Instance
from .materials import true_profit_value
from .schedule import ProductionSchedule, _model_objective_unchecked


@dataclass(frozen=True)
class OracleLimits:
    max_schedules: int = 1_000_000
    objective: str = "true"  # "true" (lot-quantized) or "linear" (model objective)

    def __post_init__(self):
        if self.max_schedules < 1:
            raise ValidationError("max_schedules must be >= 1")
        if self.objective not in ("true", "linear"):
            raise ValidationError(f"unknown oracle objective '{self.objective}'")


@dataclass
class ExactOutcome:
    optimum: float
    schedule: ProductionSchedule
    feasible_count: int


def _count_paths(demand: list[int], initial: int, capacity: list[int]) -> int:
    """Number of terminal-zero production paths for one product."""
    total = sum(demand) - initial
    if total < 0:
        return 0
    q = len(demand)
    states = {initial: 1}  # inventory after serving demand -> path count
    for t in range(q):
        nxt: dict[int, int] = {}
        for inv, count in states.items():
            lo = max(0, demand[t] - inv)
            produced_so_far = inv + sum(demand[:t]) - initial
            hi = min(capacity[t], total - produced_so_far)
            for v in range(lo, hi + 1):
                new_inv = inv + v - demand[t]
                nxt[new_inv] = nxt.get(new_inv, 0) + count
        states = nxt
    return states.get(0, 0)


def _product_paths(demand: list[int], initial: int, capacity: list[int]) -> list[tuple[int, ...]]:
    total = sum(demand) - initial
    q = len(demand)
    paths: list[tuple[int, ...]] = []
    prefix: list[int] = []

    def rec(t: int, inv: int, produced: int) -> None:
        if t == q:
            if produced == total:
                paths.append(tuple(prefix))
            return
        lo = max(0, demand[t] - inv)
        hi = min(capacity[t], total - produced)
        for v in range(lo, hi + 1):
            prefix.append(v)
            rec(t + 1, inv + v - demand[t], produced + v)
            prefix.pop()

    if total >= 0:
        rec(0, initial, 0)
    return paths


def enumerate_exact(inst: Instance, limits: OracleLimits | None = None) -> ExactOutcome:
    """Maximize the selected objective over every feasible integer schedule.

    Ties pick the lexicographically smallest schedule (row-major).  Requires
    integral demand, initial inventory and capacity.
    """
    limits = limits or OracleLimits()
    for name, arr in (
        ("demand", inst.demand),
        ("initial_inventory", inst.initial_inventory),
        ("capacity", inst.capacity),
    ):
        if np.any(arr != np.round(arr)):
            raise ValidationError(f"exact enumeration needs integral '{name}' data")

    n, q = inst.dims.n_products, inst.dims.n_periods
    demand = inst.demand.astype(int).tolist()
    initial = inst.initial_inventory.astype(int).tolist()
    capacity = inst.capacity.astype(int).tolist()

    space = 1
    for i in range(n):
        count = _count_paths(demand[i], initial[i], capacity[i])
        if count == 0:
            raise InfeasibleInstanceError(
                f"product {i} admits no terminal-zero production path"
            )
        space *= count
    if space > limits.max_schedules:
        raise LimitExceededError(
            f"search space of {space} schedules exceeds the limit {limits.max_schedules}"
        )

    per_product = [_product_paths(demand[i], initial[i], capacity[i]) for i in range(n)]
    cap = np.array(capacity, dtype=float)

    if limits.objective == "true":
        evaluate = true_profit_value
    else:
        evaluate = _model_objective_unchecked

    best_value = None
    best_x = None
    feasible = 0
    for combo in itertools.product(*per_product):
        x = np.array(combo, dtype=float)
        if np.any(x.sum(axis=0) > cap):
            continue
        feasible += 1
        value = evaluate(inst, x)
        if best_value is None or value > best_value:
            best_value = value
            best_x = x
    if best_x is None:
        raise InfeasibleInstanceError("no schedule satisfies the per-period capacity")
    return ExactOutcome(
        optimum=float(best_value),
        schedule=ProductionSchedule(best_x, integer_mode=True),
        feasible_count=feasible,
    )
