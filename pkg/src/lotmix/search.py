"""Multi-start local search on the lot-quantized profit.

The lot-quantized objective is piecewise constant in the purchase terms, so
gradient methods see a flat landscape almost everywhere.  Instead the search
descends (in the maximization sense) through two transfer move families:

  A. move packages of one product from a period to an earlier one, capacity
     permitting (inventory between the two periods only grows);
  B. move packages to a later period when every intermediate inventory level
     can absorb the drop.

Transfer sizes sweep a ladder from large to small; moves are accepted on
first improvement.  Each start is an independent randomized feasible
schedule (just-in-time production plus seeded early shifts); the best final
schedule wins, ties broken by lowest start seed.  In relaxed mode production
may be fractional but purchases still round up to whole lots.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .errors import InfeasibleInstanceError, ValidationError
from .instance import Instance
from .materials import _breakdown, run_heuristic, true_profit_value
from .milp import MilpConfig
from .schedule import ProductionSchedule, ProfitBreakdown, require_feasible

#: Start labels for injected (non-random) starts.
INCUMBENT_START = -2
MILP_START = -1


@dataclass(frozen=True)
class SearchConfig:
    starts: int = 32
    master_seed: int = 0
    move_budget: int = 20000
    integer_mode: bool = True
    step_ladder: tuple[float, ...] = (1000.0, 100.0, 10.0, 1.0)
    include_milp_start: bool = True

    def __post_init__(self):
        if self.starts < 1:
            raise ValidationError("starts must be >= 1")
        if self.move_budget < 1:
            raise ValidationError("move_budget must be >= 1")
        if not self.step_ladder:
            raise ValidationError("step_ladder must be nonempty")
        if any(s <= 0 for s in self.step_ladder):
            raise ValidationError("step_ladder entries must be positive")
        if any(a <= b for a, b in zip(self.step_ladder, self.step_ladder[1:])):
            raise ValidationError("step_ladder must be strictly decreasing")


@dataclass
class StartSummary:
    seed: int
    start_value: float
    final_value: float
    evaluations: int


@dataclass
class SearchOutcome:
    best_schedule: ProductionSchedule
    best_breakdown: ProfitBreakdown
    starts: list[StartSummary]
    wall_time: float


def true_profit(inst: Instance, sched: ProductionSchedule) -> ProfitBreakdown:
    """Lot-quantized profit breakdown of a feasible schedule."""
    require_feasible(inst, sched)
    return _breakdown(inst, sched.x)


def seed_schedule(inst: Instance, seed: int, integer_mode: bool = True) -> ProductionSchedule:
    """Deterministic feasible start: just-in-time base plus random early shifts.

    Demand shortfalls are produced as late as capacity allows (which succeeds
    for every aggregate-feasible instance), then a seeded pass moves random
    amounts to earlier periods with spare capacity.
    """
    n, q = inst.dims.n_products, inst.dims.n_periods
    demand = inst.demand
    if integer_mode:
        for name, arr in (
            ("demand", demand),
            ("initial_inventory", inst.initial_inventory),
            ("capacity", inst.capacity),
        ):
            if np.any(arr != np.round(arr)):
                raise ValidationError(
                    f"integer-mode seeding needs integral '{name}' data"
                )

    x = np.zeros((n, q))
    spare = inst.capacity.astype(float).copy()
    stock = inst.initial_inventory.astype(float).copy()
    for t in range(q):
        need = np.maximum(0.0, demand[:, t] - stock)
        for i in range(n):
            remaining = need[i]
            for tau in range(t, -1, -1):
                if remaining <= 0:
                    break
                take = min(remaining, spare[tau])
                if take > 0:
                    x[i, tau] += take
                    spare[tau] -= take
                    remaining -= take
            if remaining > 1e-9:
                raise InfeasibleInstanceError(
                    f"cannot cover demand of product {i} through period {t}"
                )
        stock = np.maximum(stock - demand[:, t], 0.0)

    rng = np.random.default_rng(seed)
    for _ in range(2 * n * q):
        i = int(rng.integers(n))
        src = int(rng.integers(1, q)) if q > 1 else 0
        dst = int(rng.integers(0, src)) if src > 0 else 0
        if src == dst:
            continue
        room = min(x[i, src], spare[dst])
        if integer_mode:
            room = float(np.floor(room))
            if room < 1:
                continue
            delta = float(rng.integers(1, int(room) + 1))
        else:
            if room <= 0:
                continue
            delta = float(rng.uniform(0.0, room))
        x[i, src] -= delta
        x[i, dst] += delta
        spare[dst] -= delta
        spare[src] += delta
    return ProductionSchedule(x, integer_mode=integer_mode)


def _descend(inst: Instance, x0: np.ndarray, cfg: SearchConfig):
    """First-improvement descent; returns (x, start_value, final_value, evals)."""
    n, q = x0.shape
    demand = inst.demand
    capacity = inst.capacity
    x = x0.copy()
    stock = inst.initial_inventory[:, None] + np.cumsum(x - demand, axis=1)
    totals = x.sum(axis=0)
    value = true_profit_value(inst, x)
    start_value = value
    evals = 1
    min_move = 1.0 if cfg.integer_mode else 1e-9

    improved_outer = True
    while improved_outer and evals < cfg.move_budget:
        improved_outer = False
        for step in cfg.step_ladder:
            improving = True
            while improving and evals < cfg.move_budget:
                improving = False
                for i in range(n):
                    for src in range(q):
                        if x[i, src] < min_move:
                            continue
                        for dst in range(q):
                            if dst == src:
                                continue
                            room = min(x[i, src], capacity[dst] - totals[dst])
                            if dst > src:
                                room = min(room, stock[i, src:dst].min())
                            delta = min(step, room)
                            if cfg.integer_mode:
                                delta = float(np.floor(delta))
                            if delta < min_move:
                                continue
                            x[i, src] -= delta
                            x[i, dst] += delta
                            candidate = true_profit_value(inst, x)
                            evals += 1
                            if candidate > value:
                                value = candidate
                                totals[src] -= delta
                                totals[dst] += delta
                                if dst < src:
                                    stock[i, dst:src] += delta
                                else:
                                    stock[i, src:dst] -= delta
                                improving = True
                                improved_outer = True
                            else:
                                x[i, src] += delta
                                x[i, dst] -= delta
                            if evals >= cfg.move_budget:
                                break
                        if evals >= cfg.move_budget:
                            break
                    if evals >= cfg.move_budget:
                        break
    return x, start_value, value, evals


def local_search(
    inst: Instance, start: ProductionSchedule, cfg: SearchConfig
) -> ProductionSchedule:
    """Descend from a feasible start; never returns a worse schedule."""
    require_feasible(inst, start)
    x, _, _, _ = _descend(inst, start.x, cfg)
    return ProductionSchedule(x, integer_mode=cfg.integer_mode)


def _derived_seed(master_seed: int, k: int) -> int:
    return int(np.random.SeedSequence([master_seed, k]).generate_state(1)[0])


def _integral_data(inst: Instance) -> bool:
    return bool(
        np.all(inst.demand == np.round(inst.demand))
        and np.all(inst.initial_inventory == np.round(inst.initial_inventory))
        and np.all(inst.capacity == np.round(inst.capacity))
    )


def multi_start(
    inst: Instance,
    cfg: SearchConfig,
    milp_cfg: MilpConfig | None = None,
    milp_start: ProductionSchedule | None = None,
    extra_starts: list[tuple[int, ProductionSchedule]] | None = None,
    workers: int | None = None,
) -> SearchOutcome:
    """Best of `starts` seeded descents plus the injected starts.

    With ``include_milp_start`` the lot-rounding heuristic's schedule joins
    the pool, so the result can never fall below its updated profit.  In
    relaxed mode the integer-mode incumbent is injected as well (computed
    here unless the caller passes it via ``extra_starts``), which guarantees
    relaxed-best >= integer-best for the same master seed.
    """
    t0 = time.perf_counter()
    pool: list[tuple[int, np.ndarray]] = []

    milp_sched = milp_start
    if cfg.include_milp_start and milp_sched is None:
        milp_sched = run_heuristic(inst, milp_cfg).schedule

    if extra_starts is None and not cfg.integer_mode and _integral_data(inst):
        integer_outcome = multi_start(
            inst,
            replace(cfg, integer_mode=True),
            milp_cfg=milp_cfg,
            milp_start=milp_sched,
            workers=workers,
        )
        extra_starts = [(INCUMBENT_START, integer_outcome.best_schedule)]

    for label, sched in extra_starts or []:
        require_feasible(inst, sched)
        pool.append((label, sched.x))
    if cfg.include_milp_start and milp_sched is not None:
        pool.append((MILP_START, milp_sched.x))
    for k in range(cfg.starts):
        sched = seed_schedule(inst, _derived_seed(cfg.master_seed, k), cfg.integer_mode)
        pool.append((k, sched.x))

    if workers is None:
        workers = int(os.environ.get("LOTMIX_THREADS", "1"))

    def job(entry):
        label, x0 = entry
        x, start_value, final_value, evals = _descend(inst, x0, cfg)
        return label, x, start_value, final_value, evals

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool_exec:
            results = list(pool_exec.map(job, pool))
    else:
        results = [job(entry) for entry in pool]

    summaries = [
        StartSummary(seed=label, start_value=sv, final_value=fv, evaluations=ev)
        for label, _, sv, fv, ev in results
    ]
    best_label, best_x, _, _, _ = max(results, key=lambda r: (r[3], -r[0]))
    best_schedule = ProductionSchedule(best_x, integer_mode=cfg.integer_mode)
    best_breakdown = true_profit(inst, best_schedule)
    return SearchOutcome(
        best_schedule=best_schedule,
        best_breakdown=best_breakdown,
        starts=summaries,
        wall_time=time.perf_counter() - t0,
    )
