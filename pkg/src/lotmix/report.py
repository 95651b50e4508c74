"""Side-by-side comparison of the three solution paths, plus replay arithmetic.

``compare_models`` runs the lot-rounding heuristic, the integer multi-start
search and the relaxed multi-start search (seeded with the integer incumbent)
and assembles their schedules, start-of-period inventory levels, costs and
utilization into one report.  Every figure in a report is recomputable from
the embedded schedule and the instance.

``replay_schedule`` is a fixture-arithmetic mode: it prices an externally
supplied schedule without requiring it to be feasible, clamping inventory at
zero the way the published case-study tables do.  The shipped case-study
schedules contain product columns that are internally inconsistent with the
published demand; the clamped recursion reproduces their printed per-period
inventory totals anyway.
"""

from __future__ import annotations

import hashlib
import io
import json
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .errors import ValidationError
from .instance import Instance, _mat, _num, _vec, render_instance
from .materials import run_heuristic
from .milp import MilpConfig
from .schedule import ProductionSchedule, start_of_period_stocks
from .search import INCUMBENT_START, SearchConfig, multi_start, true_profit

MODEL_ORDER = ("milp-heuristic", "nlp-integer", "nlp-relaxed")
RENDER_FORMATS = ("table-text", "csv", "structured")


@dataclass
class ModelResult:
    name: str
    schedule: np.ndarray
    integer_mode: bool
    start_inventory: np.ndarray
    profit: float
    material_cost: float
    inventory_cost: float
    utilization: float
    production_totals: np.ndarray
    inventory_totals: np.ndarray


@dataclass
class ComparisonReport:
    results: list[ModelResult]
    instance_digest: str
    config: dict
    warnings: list[str] = field(default_factory=list)


@dataclass
class ReplayReport:
    production_totals: np.ndarray
    inventory_totals: np.ndarray
    inventory_cost: float
    horizon_production: np.ndarray
    conservation_gap: np.ndarray  # horizon production - (total demand - initial stock)
    instance_digest: str
    notes: list[str] = field(default_factory=list)


def instance_digest(inst: Instance) -> str:
    return hashlib.sha256(render_instance(inst).encode("utf-8")).hexdigest()


def _model_result(name: str, inst: Instance, sched: ProductionSchedule) -> ModelResult:
    breakdown = true_profit(inst, sched)
    starts = start_of_period_stocks(inst, sched.x)
    return ModelResult(
        name=name,
        schedule=sched.x.copy(),
        integer_mode=sched.integer_mode,
        start_inventory=starts,
        profit=breakdown.profit,
        material_cost=breakdown.material_cost,
        inventory_cost=breakdown.inventory_cost,
        utilization=breakdown.utilization,
        production_totals=sched.x.sum(axis=0),
        inventory_totals=starts.sum(axis=0),
    )


def compare_models(
    inst: Instance, milp_cfg: MilpConfig | None = None, search_cfg: SearchConfig | None = None
) -> ComparisonReport:
    """Run all three solution paths and tabulate them in a fixed order."""
    milp_cfg = milp_cfg or MilpConfig()
    search_cfg = search_cfg or SearchConfig()

    heuristic = run_heuristic(inst, milp_cfg)
    integer_out = multi_start(
        inst,
        replace(search_cfg, integer_mode=True),
        milp_cfg=milp_cfg,
        milp_start=heuristic.schedule,
    )
    relaxed_out = multi_start(
        inst,
        replace(search_cfg, integer_mode=False),
        milp_cfg=milp_cfg,
        milp_start=heuristic.schedule,
        extra_starts=[(INCUMBENT_START, integer_out.best_schedule)],
    )

    results = [
        _model_result("milp-heuristic", inst, heuristic.schedule),
        _model_result("nlp-integer", inst, integer_out.best_schedule),
        _model_result("nlp-relaxed", inst, relaxed_out.best_schedule),
    ]
    notes = []
    for res in results:
        if res.utilization < inst.utilization_floor:
            notes.append(
                f"{res.name}: utilization {res.utilization:.4f} below floor "
                f"{inst.utilization_floor:.2f}"
            )
    return ComparisonReport(
        results=results,
        instance_digest=instance_digest(inst),
        config={"milp": asdict(milp_cfg), "search": asdict(search_cfg)},
        warnings=notes,
    )


def clamped_start_stocks(inst: Instance, x: np.ndarray) -> np.ndarray:
    """Start-of-period stock with shortfalls clamped at zero.

    Identical to the exact recursion on feasible schedules; on inconsistent
    fixture schedules it mirrors the published tables, which carry no
    negative inventory.
    """
    n, q = x.shape
    stocks = np.zeros((n, q))
    current = inst.initial_inventory.astype(float).copy()
    for t in range(q):
        stocks[:, t] = current
        current = np.maximum(current + x[:, t] - inst.demand[:, t], 0.0)
    return stocks


def replay_schedule(
    inst: Instance, sched: ProductionSchedule, notes: list[str] | None = None
) -> ReplayReport:
    """Price an external schedule's per-period arithmetic (fixture mode)."""
    want = (inst.dims.n_products, inst.dims.n_periods)
    if sched.x.shape != want:
        raise ValidationError(f"schedule shape {sched.x.shape} does not match instance {want}")
    stocks = clamped_start_stocks(inst, sched.x)
    horizon = sched.x.sum(axis=1)
    required = inst.demand.sum(axis=1) - inst.initial_inventory
    return ReplayReport(
        production_totals=sched.x.sum(axis=0),
        inventory_totals=stocks.sum(axis=0),
        inventory_cost=float(inst.holding_cost @ stocks.sum(axis=0)),
        horizon_production=horizon,
        conservation_gap=horizon - required,
        instance_digest=instance_digest(inst),
        notes=list(notes or []),
    )


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------


def _fmt(value) -> str:
    f = float(value)
    if f.is_integer() and abs(f) < 1e15:
        return str(int(f))
    return repr(f)


def _row(label: str, values) -> str:
    return ", ".join([label] + [_fmt(v) for v in values])


def _csv_row(label: str, values) -> str:
    return ",".join([label] + [_fmt(v) for v in values])


def _product_labels(n: int) -> list[str]:
    return [f"P{i + 1}" for i in range(n)]


def _comparison_doc(report: ComparisonReport) -> dict:
    return {
        "instance_digest": report.instance_digest,
        "config": report.config,
        "models": [
            {
                "name": res.name,
                "integer_mode": res.integer_mode,
                "profit": _num(res.profit),
                "material_cost": _num(res.material_cost),
                "inventory_cost": _num(res.inventory_cost),
                "utilization": _num(res.utilization),
                "schedule": _mat(res.schedule),
                "start_inventory": _mat(res.start_inventory),
                "production_totals": _vec(res.production_totals),
                "inventory_totals": _vec(res.inventory_totals),
            }
            for res in report.results
        ],
        "warnings": list(report.warnings),
    }


def _comparison_table(report: ComparisonReport) -> str:
    out = io.StringIO()
    out.write(f"Instance digest, {report.instance_digest}\n")
    for res in report.results:
        n, q = res.schedule.shape
        labels = _product_labels(n)
        out.write(f"\n== {res.name} ==\n")
        out.write(_row("Schedule", [f"period_{t + 1}" for t in range(q)]) + "\n")
        for i, label in enumerate(labels):
            out.write(_row(label, res.schedule[i]) + "\n")
        out.write(_row("Start inventory", [f"period_{t + 1}" for t in range(q)]) + "\n")
        for i, label in enumerate(labels):
            out.write(_row(label, res.start_inventory[i]) + "\n")
        out.write(_row("Production totals", res.production_totals) + "\n")
        out.write(_row("Inventory totals", res.inventory_totals) + "\n")
        out.write(f"Profit, {_fmt(res.profit)}\n")
        out.write(f"Material Cost, {_fmt(res.material_cost)}\n")
        out.write(f"Total Cost, {_fmt(res.inventory_cost)}\n")
        out.write(f"Utilization, {_fmt(res.utilization)}\n")
    for note in report.warnings:
        out.write(f"Warning: {note}\n")
    return out.getvalue()


def _csv_matrix(out, section: str, matrix: np.ndarray, labels: list[str]) -> None:
    q = matrix.shape[1]
    out.write(f"# {section}\n")
    out.write(",".join(["product"] + [f"period_{t + 1}" for t in range(q)]) + "\n")
    for label, row in zip(labels, matrix):
        out.write(",".join([label] + [_fmt(v) for v in row]) + "\n")
    out.write("\n")


def _comparison_csv(report: ComparisonReport) -> str:
    out = io.StringIO()
    for res in report.results:
        labels = _product_labels(res.schedule.shape[0])
        _csv_matrix(out, f"{res.name}/schedule", res.schedule, labels)
        _csv_matrix(out, f"{res.name}/start_inventory", res.start_inventory, labels)
        out.write(f"# {res.name}/summary\n")
        out.write("metric,value\n")
        out.write(f"profit,{_fmt(res.profit)}\n")
        out.write(f"material_cost,{_fmt(res.material_cost)}\n")
        out.write(f"inventory_cost,{_fmt(res.inventory_cost)}\n")
        out.write(f"utilization,{_fmt(res.utilization)}\n")
        out.write("\n")
    return out.getvalue()


def render_report(report: ComparisonReport, format: str = "table-text") -> str:
    """Deterministic bytes for a comparison report in the requested format."""
    if format == "structured":
        return json.dumps(_comparison_doc(report), indent=2) + "\n"
    if format == "table-text":
        return _comparison_table(report)
    if format == "csv":
        return _comparison_csv(report)
    raise ValidationError(f"unknown report format '{format}'")


def parse_csv_matrices(text: str) -> dict[str, np.ndarray]:
    """Recover every matrix section of a CSV render (round-trip check)."""
    matrices: dict[str, np.ndarray] = {}
    section = None
    rows: list[list[float]] = []
    for line in text.splitlines():
        if line.startswith("# "):
            if section is not None and rows:
                matrices[section] = np.array(rows)
            section = line[2:]
            rows = []
        elif not line.strip():
            if section is not None and rows:
                matrices[section] = np.array(rows)
            section = None
            rows = []
        elif section is not None and not line.startswith(("product,", "metric,")):
            cells = line.split(",")
            try:
                rows.append([float(c) for c in cells[1:]])
            except ValueError:
                continue  # summary rows with non-numeric cells
    if section is not None and rows:
        matrices[section] = np.array(rows)
    return matrices


def _replay_doc(report: ReplayReport) -> dict:
    return {
        "instance_digest": report.instance_digest,
        "production_totals": _vec(report.production_totals),
        "inventory_totals": _vec(report.inventory_totals),
        "inventory_cost": _num(report.inventory_cost),
        "horizon_production": _vec(report.horizon_production),
        "conservation_gap": _vec(report.conservation_gap),
        "notes": list(report.notes),
    }


def render_replay(report: ReplayReport, format: str = "table-text") -> str:
    if format == "structured":
        return json.dumps(_replay_doc(report), indent=2) + "\n"
    if format == "csv":
        out = io.StringIO()
        out.write("# replay/per_period\n")
        q = len(report.production_totals)
        out.write(",".join(["metric"] + [f"period_{t + 1}" for t in range(q)]) + "\n")
        out.write(_csv_row("production_totals", report.production_totals) + "\n")
        out.write(_csv_row("inventory_totals", report.inventory_totals) + "\n")
        out.write("\n# replay/per_product\n")
        n = len(report.horizon_production)
        out.write(",".join(["metric"] + _product_labels(n)) + "\n")
        out.write(_csv_row("horizon_production", report.horizon_production) + "\n")
        out.write(_csv_row("conservation_gap", report.conservation_gap) + "\n")
        out.write("\n# replay/summary\nmetric,value\n")
        out.write(f"inventory_cost,{_fmt(report.inventory_cost)}\n")
        return out.getvalue()
    if format == "table-text":
        out = io.StringIO()
        out.write(f"Instance digest, {report.instance_digest}\n")
        out.write(_row("Production totals", report.production_totals) + "\n")
        out.write(_row("Inventory totals", report.inventory_totals) + "\n")
        out.write(f"Total Cost, {_fmt(report.inventory_cost)}\n")
        out.write(_row("Horizon production", report.horizon_production) + "\n")
        out.write(_row("Conservation gap", report.conservation_gap) + "\n")
        for note in report.notes:
            out.write(f"Note: {note}\n")
        return out.getvalue()
    raise ValidationError(f"unknown report format '{format}'")
