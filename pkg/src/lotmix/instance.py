"""Problem data for product-mix master scheduling with lot-quantized materials.

An :class:`Instance` bundles everything the planning models consume: demand
and selling prices per product over the horizon, plant capacity, the cost
structure, and the raw-material side (lot weights, prices per kilogram, and
the consumption matrix).  Instances are immutable value objects; every
operation in this package is a pure function over them.

The six-product case-study base data ships as a fixture.  Its material side
is synthesized from documented ranges (the original material dataset is not
published), seeded so experiments stay reproducible.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import InfeasibleInstanceError, SchemaError, ValidationError

DEFAULT_UTILIZATION_FLOOR = 0.90
DEFAULT_HOLDING_COST = 3.0
DEFAULT_VARIABLE_COST = 3.08
DEFAULT_FIXED_COST = 88800.0

#: Canonical field order of the instance document.
DOC_FIELDS = (
    "dims",
    "prices",
    "demand",
    "initial_inventory",
    "capacity",
    "holding_cost",
    "variable_cost",
    "fixed_cost",
    "lot_weights",
    "material_prices",
    "consumption",
    "utilization_floor",
)


@dataclass(frozen=True)
class Dimensions:
    """Problem size: products x materials x periods."""

    n_products: int
    n_materials: int
    n_periods: int

    def __post_init__(self):
        if self.n_products < 1:
            raise ValidationError("n_products must be >= 1")
        if self.n_periods < 1:
            raise ValidationError("n_periods must be >= 1")
        # Zero materials is allowed: it yields useful degenerate instances
        # where the lot-quantized and fractional objectives coincide.
        if self.n_materials < 0:
            raise ValidationError("n_materials must be >= 0")


@dataclass(frozen=True)
class GeneratorRanges:
    """Sampling ranges for synthetic instances.

    Defaults are sized so that, at case-study scale (6 products, 27
    materials, 6 periods), the per-period fractional lot need of a typical
    material lands in [1, 50] lots and rounding effects stay economically
    relevant.
    """

    consumption_range: tuple[float, float] = (0.005, 0.5)
    lot_weight_range: tuple[float, float] = (100.0, 4000.0)
    material_price_range: tuple[float, float] = (0.2, 2.0)
    demand_range: tuple[float, float] = (1000.0, 6000.0)
    price_range: tuple[float, float] = (15.0, 35.0)
    slack_factor: float = 1.15

    def __post_init__(self):
        for name in (
            "consumption_range",
            "lot_weight_range",
            "material_price_range",
            "demand_range",
            "price_range",
        ):
            lo, hi = getattr(self, name)
            if lo < 0:
                raise ValidationError(f"{name} lower bound must be nonnegative, got {lo}")
            if hi < lo:
                raise ValidationError(f"{name} must satisfy lower <= upper, got ({lo}, {hi})")
        if self.slack_factor < 1.0:
            raise ValidationError(f"slack_factor must be >= 1, got {self.slack_factor}")


def _as_array(value, name: str, ndim: int) -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"field '{name}' is not numeric: {exc}") from None
    if arr.ndim != ndim:
        raise SchemaError(f"field '{name}' must be {ndim}-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"field '{name}' contains non-finite entries")
    return arr


@dataclass(eq=False)
class Instance:
    """One complete scheduling problem.

    Shapes: ``price``/``initial_inventory`` are per-product vectors,
    ``demand`` is products x periods, ``capacity``/``holding_cost`` are
    per-period vectors, ``lot_weight``/``material_price`` are per-material
    vectors and ``consumption`` is materials x products (kg per package).
    """

    dims: Dimensions
    price: np.ndarray
    demand: np.ndarray
    initial_inventory: np.ndarray
    capacity: np.ndarray
    holding_cost: np.ndarray
    variable_cost: float
    fixed_cost: float
    lot_weight: np.ndarray
    material_price: np.ndarray
    consumption: np.ndarray
    utilization_floor: float = DEFAULT_UTILIZATION_FLOOR

    def __post_init__(self):
        self.price = _as_array(self.price, "prices", 1)
        self.demand = _as_array(self.demand, "demand", 2)
        self.initial_inventory = _as_array(self.initial_inventory, "initial_inventory", 1)
        self.capacity = _as_array(self.capacity, "capacity", 1)
        self.holding_cost = _as_array(self.holding_cost, "holding_cost", 1)
        self.lot_weight = _as_array(self.lot_weight, "lot_weights", 1)
        self.material_price = _as_array(self.material_price, "material_prices", 1)
        self.consumption = _as_array(self.consumption, "consumption", 2)
        self.variable_cost = float(self.variable_cost)
        self.fixed_cost = float(self.fixed_cost)
        self.utilization_floor = float(self.utilization_floor)
        self._validate()

    def _validate(self) -> None:
        n, m, q = self.dims.n_products, self.dims.n_materials, self.dims.n_periods
        shapes = {
            "prices": (self.price, (n,)),
            "demand": (self.demand, (n, q)),
            "initial_inventory": (self.initial_inventory, (n,)),
            "capacity": (self.capacity, (q,)),
            "holding_cost": (self.holding_cost, (q,)),
            "lot_weights": (self.lot_weight, (m,)),
            "material_prices": (self.material_price, (m,)),
            "consumption": (self.consumption, (m, n)),
        }
        for name, (arr, want) in shapes.items():
            if arr.shape != want:
                raise ValidationError(
                    f"shape of '{name}' must be {want} to match dims, got {arr.shape}"
                )

        for name, arr in (
            ("demand", self.demand),
            ("initial_inventory", self.initial_inventory),
            ("capacity", self.capacity),
            ("holding_cost", self.holding_cost),
            ("material_prices", self.material_price),
            ("consumption", self.consumption),
        ):
            if np.any(arr < 0):
                idx = tuple(int(k) for k in np.argwhere(arr < 0)[0])
                raise ValidationError(
                    f"'{name}' must be nonnegative; {name}{list(idx)} = {arr[idx]}"
                )
        if self.variable_cost < 0:
            raise ValidationError(f"variable_cost must be nonnegative, got {self.variable_cost}")
        if self.fixed_cost < 0:
            raise ValidationError(f"fixed_cost must be nonnegative, got {self.fixed_cost}")
        if np.any(self.price <= 0):
            i = int(np.argwhere(self.price <= 0)[0][0])
            raise ValidationError(f"'prices' must be strictly positive; prices[{i}] = {self.price[i]}")
        if np.any(self.lot_weight <= 0):
            j = int(np.argwhere(self.lot_weight <= 0)[0][0])
            raise ValidationError(
                f"'lot_weights' must be strictly positive; lot_weights[{j}] = {self.lot_weight[j]}"
            )
        if not 0.0 <= self.utilization_floor <= 1.0:
            raise ValidationError(
                f"utilization_floor must lie in [0, 1], got {self.utilization_floor}"
            )

        # Aggregate feasibility: cumulative demand net of initial stock must
        # fit under cumulative capacity for every horizon prefix, otherwise
        # no backlog-free schedule exists.
        prefix_demand = np.cumsum(self.demand.sum(axis=0))
        prefix_capacity = np.cumsum(self.capacity)
        stock = self.initial_inventory.sum()
        for t in range(q):
            if prefix_demand[t] - stock > prefix_capacity[t] + 1e-9:
                raise InfeasibleInstanceError(
                    "aggregate infeasibility: demand through period "
                    f"{t + 1} ({prefix_demand[t]}) exceeds initial stock ({stock}) "
                    f"plus capacity ({prefix_capacity[t]})"
                )

    def __eq__(self, other) -> bool:
        if not isinstance(other, Instance):
            return NotImplemented
        return (
            self.dims == other.dims
            and self.variable_cost == other.variable_cost
            and self.fixed_cost == other.fixed_cost
            and self.utilization_floor == other.utilization_floor
            and np.array_equal(self.price, other.price)
            and np.array_equal(self.demand, other.demand)
            and np.array_equal(self.initial_inventory, other.initial_inventory)
            and np.array_equal(self.capacity, other.capacity)
            and np.array_equal(self.holding_cost, other.holding_cost)
            and np.array_equal(self.lot_weight, other.lot_weight)
            and np.array_equal(self.material_price, other.material_price)
            and np.array_equal(self.consumption, other.consumption)
        )


def _num(value):
    """JSON-friendly number: integral floats render as ints."""
    f = float(value)
    if f.is_integer() and abs(f) < 1e15:
        return int(f)
    return f


def _vec(arr) -> list:
    return [_num(v) for v in arr]


def _mat(arr) -> list:
    return [[_num(v) for v in row] for row in arr]


def render_instance(inst: Instance) -> str:
    """Serialize an instance to its canonical document (deterministic bytes)."""
    doc = {
        "dims": {
            "n_products": inst.dims.n_products,
            "n_materials": inst.dims.n_materials,
            "n_periods": inst.dims.n_periods,
        },
        "prices": _vec(inst.price),
        "demand": _mat(inst.demand),
        "initial_inventory": _vec(inst.initial_inventory),
        "capacity": _vec(inst.capacity),
        "holding_cost": _vec(inst.holding_cost),
        "variable_cost": _num(inst.variable_cost),
        "fixed_cost": _num(inst.fixed_cost),
        "lot_weights": _vec(inst.lot_weight),
        "material_prices": _vec(inst.material_price),
        "consumption": _mat(inst.consumption),
        "utilization_floor": _num(inst.utilization_floor),
    }
    return json.dumps(doc, indent=2) + "\n"


def parse_instance(doc: str | dict) -> Instance:
    """Parse and fully validate an instance document.

    Raises :class:`SchemaError` for missing/mistyped fields and
    :class:`ValidationError` (or :class:`InfeasibleInstanceError`) when an
    invariant is violated.
    """
    if isinstance(doc, (str, bytes)):
        try:
            data = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"instance document is not valid JSON: {exc}") from None
    else:
        data = doc
    if not isinstance(data, dict):
        raise SchemaError("instance document root must be an object")

    missing = [k for k in DOC_FIELDS if k not in data]
    if missing:
        raise SchemaError(f"instance document missing fields: {missing}")

    dims_raw = data["dims"]
    if not isinstance(dims_raw, dict):
        raise SchemaError("field 'dims' must be an object")
    try:
        dims = Dimensions(
            n_products=int(dims_raw["n_products"]),
            n_materials=int(dims_raw["n_materials"]),
            n_periods=int(dims_raw["n_periods"]),
        )
    except KeyError as exc:
        raise SchemaError(f"field 'dims' missing key {exc}") from None
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"field 'dims' has non-integer entries: {exc}") from None

    def scalar(name: str) -> float:
        value = data[name]
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise SchemaError(f"field '{name}' must be a number, got {type(value).__name__}")
        return float(value)

    return Instance(
        dims=dims,
        price=_as_array(data["prices"], "prices", 1),
        demand=_as_array(data["demand"], "demand", 2),
        initial_inventory=_as_array(data["initial_inventory"], "initial_inventory", 1),
        capacity=_as_array(data["capacity"], "capacity", 1),
        holding_cost=_as_array(data["holding_cost"], "holding_cost", 1),
        variable_cost=scalar("variable_cost"),
        fixed_cost=scalar("fixed_cost"),
        lot_weight=_as_array(data["lot_weights"], "lot_weights", 1),
        material_price=_as_array(data["material_prices"], "material_prices", 1),
        consumption=_as_array(data["consumption"], "consumption", 2),
        utilization_floor=scalar("utilization_floor"),
    )


def load_instance(path) -> Instance:
    with open(path, encoding="utf-8") as fh:
        return parse_instance(fh.read())


def save_instance(inst: Instance, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(render_instance(inst))


def _draw_materials(rng: np.random.Generator, dims: Dimensions, ranges: GeneratorRanges):
    m, n = dims.n_materials, dims.n_products
    lot_weight = rng.uniform(*ranges.lot_weight_range, m)
    material_price = rng.uniform(*ranges.material_price_range, m)
    consumption = rng.uniform(*ranges.consumption_range, (m, n))
    return lot_weight, material_price, consumption


def generate_instance(
    seed: int, dims: Dimensions, ranges: GeneratorRanges | None = None
) -> Instance:
    """Deterministically synthesize a valid instance from (seed, dims, ranges).

    Demand is drawn as integers so the standard integer-data shortcuts of the
    solvers apply; initial inventory is zero.  Capacity per period is the
    slack-scaled mean period demand, rounded up, raised further if a skewed
    draw would otherwise violate aggregate feasibility.
    """
    ranges = ranges or GeneratorRanges()
    rng = np.random.default_rng(seed)
    n, q = dims.n_products, dims.n_periods

    demand = np.round(rng.uniform(*ranges.demand_range, (n, q)))
    price = rng.uniform(*ranges.price_range, n)
    lot_weight, material_price, consumption = _draw_materials(rng, dims, ranges)

    total = demand.sum()
    base = math.ceil(ranges.slack_factor * total / q)
    prefix = np.cumsum(demand.sum(axis=0))
    needed = max(math.ceil(prefix[t] / (t + 1)) for t in range(q))
    capacity = np.full(q, float(max(base, needed)))

    return Instance(
        dims=dims,
        price=price,
        demand=demand,
        initial_inventory=np.zeros(n),
        capacity=capacity,
        holding_cost=np.full(q, DEFAULT_HOLDING_COST),
        variable_cost=DEFAULT_VARIABLE_COST,
        fixed_cost=DEFAULT_FIXED_COST,
        lot_weight=lot_weight,
        material_price=material_price,
        consumption=consumption,
        utilization_floor=DEFAULT_UTILIZATION_FLOOR,
    )


def _load_fixture(name: str) -> dict:
    text = resources.files(__package__).joinpath("fixtures", name).read_text(encoding="utf-8")
    return json.loads(text)


def case_study_tables() -> dict:
    """Raw case-study base tables (demand, initial inventory, prices, costs)."""
    return _load_fixture("case_study_tables.json")


def paper_base_instance(
    material_seed: int, ranges: GeneratorRanges | None = None
) -> Instance:
    """Case-study instance: published demand/prices/costs, seeded materials.

    The material triple (lot weights, prices per kg, consumption matrix) is
    not part of the published case, so it is drawn from the generator ranges
    using ``material_seed``.
    """
    tables = case_study_tables()
    demand = np.asarray(tables["demand"], dtype=float)
    n, q = demand.shape
    dims = Dimensions(n_products=n, n_materials=27, n_periods=q)
    rng = np.random.default_rng(material_seed)
    lot_weight, material_price, consumption = _draw_materials(
        rng, dims, ranges or GeneratorRanges()
    )
    return Instance(
        dims=dims,
        price=np.asarray(tables["prices"], dtype=float),
        demand=demand,
        initial_inventory=np.asarray(tables["initial_inventory"], dtype=float),
        capacity=np.full(q, float(tables["capacity_per_period"])),
        holding_cost=np.full(q, float(tables["holding_cost_per_period"])),
        variable_cost=float(tables["variable_cost"]),
        fixed_cost=float(tables["fixed_cost_per_period"]),
        lot_weight=lot_weight,
        material_price=material_price,
        consumption=consumption,
        utilization_floor=DEFAULT_UTILIZATION_FLOOR,
    )
