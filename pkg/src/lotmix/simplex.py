"""Two-phase dense simplex for maximization models.

Models are first lowered to a standard form (all rows equalities over
nonnegative columns, right-hand sides nonnegative) with provenance that maps
solutions back to the original variable space exactly.  The solver uses
Dantzig pricing and falls back to Bland's rule after a run of degenerate
pivots, so it terminates on every input.  Problem sizes in this package are
tiny (on the order of a hundred columns), so no sparse machinery is used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import LimitExceededError
from .schedule import LinearModel

DEFAULT_PIVOT_TOL = 1e-9
DEFAULT_FEAS_TOL = 1e-6
DEFAULT_MAX_ITER = 20000
DEFAULT_STALL_LIMIT = 50


@dataclass(frozen=True)
class ColumnInfo:
    kind: str  # "variable" | "slack"
    name: str  # variable name, or owning constraint name for slacks
    sign: float = 1.0
    shift: float = 0.0


@dataclass
class StandardLP:
    """Equality-form image: maximize c @ y + constant s.t. a @ y = b, y >= 0."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    constant: float
    columns: list[ColumnInfo]
    var_columns: dict[str, list[tuple[int, float]]]
    var_shift: dict[str, float]
    fixed: dict[str, float]
    basis_hint: list  # per row: index of a +1 slack column, or None


@dataclass
class LpOutcome:
    status: str  # "optimal" | "infeasible" | "unbounded"
    values: dict[str, float]
    objective: float | None
    iterations: int


def to_standard_form(model: LinearModel) -> StandardLP:
    """Lower a linear model to equality standard form with provenance.

    Fixed variables (lower == upper) are eliminated and recorded; finite
    lower bounds are shifted to zero; upper-bounded-only variables are
    negated; free variables are split.  Finite upper bounds become extra
    rows.  Rows with negative right-hand side are negated.
    """
    model.validate()

    var_columns: dict[str, list[tuple[int, float]]] = {}
    var_shift: dict[str, float] = {}
    fixed: dict[str, float] = {}
    columns: list[ColumnInfo] = []
    ub_rows: list[tuple[int, float]] = []  # (column, bound) for col <= bound

    for v in model.variables:
        if v.lower == v.upper:
            fixed[v.name] = v.lower
            continue
        if math.isfinite(v.lower):
            col = len(columns)
            columns.append(ColumnInfo("variable", v.name, 1.0, v.lower))
            var_columns[v.name] = [(col, 1.0)]
            var_shift[v.name] = v.lower
            if math.isfinite(v.upper):
                ub_rows.append((col, v.upper - v.lower))
        elif math.isfinite(v.upper):
            col = len(columns)
            columns.append(ColumnInfo("variable", v.name, -1.0, v.upper))
            var_columns[v.name] = [(col, -1.0)]
            var_shift[v.name] = v.upper
        else:
            cp, cn = len(columns), len(columns) + 1
            columns.append(ColumnInfo("variable", v.name, 1.0, 0.0))
            columns.append(ColumnInfo("variable", v.name, -1.0, 0.0))
            var_columns[v.name] = [(cp, 1.0), (cn, -1.0)]
            var_shift[v.name] = 0.0

    n_var_cols = len(columns)
    rows: list[np.ndarray] = []
    rhs: list[float] = []
    relations: list[str] = []
    row_names: list[str] = []

    for con in model.constraints:
        row = np.zeros(n_var_cols)
        r = con.rhs
        for name, coef in con.coeffs.items():
            if name in fixed:
                r -= coef * fixed[name]
                continue
            for col, sign in var_columns[name]:
                row[col] += coef * sign
            r -= coef * var_shift[name]
        rows.append(row)
        rhs.append(r)
        relations.append(con.relation)
        row_names.append(con.name)
    for col, bound in ub_rows:
        row = np.zeros(n_var_cols)
        row[col] = 1.0
        rows.append(row)
        rhs.append(bound)
        relations.append("<=")
        row_names.append(f"ub:{columns[col].name}")

    m = len(rows)
    n_slacks = sum(1 for rel in relations if rel != "=")
    a = np.zeros((m, n_var_cols + n_slacks))
    b = np.array(rhs, dtype=float)
    slack_col_of_row: dict[int, int] = {}
    next_col = n_var_cols
    for r in range(m):
        a[r, :n_var_cols] = rows[r]
        if relations[r] == "<=":
            a[r, next_col] = 1.0
        elif relations[r] == ">=":
            a[r, next_col] = -1.0
        if relations[r] != "=":
            columns.append(ColumnInfo("slack", row_names[r]))
            slack_col_of_row[r] = next_col
            next_col += 1

    # Normalize: nonnegative right-hand sides.
    for r in range(m):
        if b[r] < 0:
            a[r] = -a[r]
            b[r] = -b[r]

    basis_hint: list = []
    for r in range(m):
        col = slack_col_of_row.get(r)
        basis_hint.append(col if col is not None and a[r, col] == 1.0 else None)

    c = np.zeros(a.shape[1])
    constant = model.objective_constant
    for name, coef in model.objective.items():
        if name in fixed:
            constant += coef * fixed[name]
            continue
        for col, sign in var_columns[name]:
            c[col] += coef * sign
        constant += coef * var_shift[name]

    return StandardLP(
        a=a,
        b=b,
        c=c,
        constant=float(constant),
        columns=columns,
        var_columns=var_columns,
        var_shift=var_shift,
        fixed=fixed,
        basis_hint=basis_hint,
    )


class _Tableau:
    """Mutable simplex tableau with objective-row bookkeeping."""

    def __init__(self, a: np.ndarray, b: np.ndarray, trace=None):
        m = a.shape[0]
        self.t = np.hstack([a.astype(float), b.reshape(m, 1).astype(float)])
        self.basis = np.full(m, -1, dtype=int)
        self.iterations = 0
        self.trace = trace

    @property
    def n_rows(self) -> int:
        return self.t.shape[0]

    @property
    def n_cols(self) -> int:
        return self.t.shape[1] - 1

    def reduced_costs(self, c: np.ndarray) -> tuple[np.ndarray, float]:
        red = c.astype(float).copy()
        z = 0.0
        for r in range(self.n_rows):
            cb = c[self.basis[r]]
            if cb != 0.0:
                red -= cb * self.t[r, :-1]
                z += cb * self.t[r, -1]
        return red, z

    def pivot(self, r: int, j: int, red: np.ndarray) -> float:
        self.t[r] /= self.t[r, j]
        col = self.t[:, j].copy()
        col[r] = 0.0
        self.t -= np.outer(col, self.t[r])
        gain = red[j] * self.t[r, -1]
        red -= red[j] * self.t[r, :-1]
        self.basis[r] = j
        self.iterations += 1
        return gain

    def run(
        self,
        red: np.ndarray,
        tol: float,
        max_iter: int,
        stall_limit: int,
        phase: int,
    ) -> str:
        """Iterate to optimality; returns "optimal" or "unbounded"."""
        bland = False
        stall = 0
        while True:
            if bland:
                eligible = np.flatnonzero(red[: self.n_cols] > tol)
                if eligible.size == 0:
                    return "optimal"
                j = int(eligible[0])
            else:
                j = int(np.argmax(red[: self.n_cols]))
                if red[j] <= tol:
                    return "optimal"

            column = self.t[:, j]
            pos = np.flatnonzero(column[: self.n_rows] > tol)
            if pos.size == 0:
                return "unbounded"
            ratios = self.t[pos, -1] / column[pos]
            rmin = float(ratios.min())
            near = pos[ratios <= rmin + 1e-12 * (1.0 + abs(rmin))]
            if bland:
                r = int(near[np.argmin(self.basis[near])])
            else:
                r = int(near[0])

            if self.trace is not None:
                self.trace(
                    f"phase{phase} iter={self.iterations + 1} enter=col{j} "
                    f"leave=row{r} basis_out=col{self.basis[r]}"
                )
            gain = self.pivot(r, j, red)
            if self.iterations > max_iter:
                raise LimitExceededError(
                    f"simplex iteration limit {max_iter} exceeded in phase {phase}"
                )
            if gain <= 1e-12:
                stall += 1
                if stall >= stall_limit:
                    bland = True
            else:
                stall = 0


def solve_lp(
    lp: StandardLP,
    tol: float = DEFAULT_PIVOT_TOL,
    feas_tol: float = DEFAULT_FEAS_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    stall_limit: int = DEFAULT_STALL_LIMIT,
    trace=None,
) -> LpOutcome:
    """Solve a standard-form LP; deterministic pivot sequence.

    The reported objective is re-evaluated at the extracted primal point
    rather than read from the tableau, so it agrees with the returned values
    exactly.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    m, ncols = lp.a.shape

    art_rows = [r for r in range(m) if lp.basis_hint[r] is None]
    n_art = len(art_rows)
    a_ext = np.hstack([lp.a, np.zeros((m, n_art))]) if n_art else lp.a.copy()
    for k, r in enumerate(art_rows):
        a_ext[r, ncols + k] = 1.0

    tab = _Tableau(a_ext, lp.b, trace=trace)
    for r in range(m):
        hint = lp.basis_hint[r]
        tab.basis[r] = hint if hint is not None else 0
    for k, r in enumerate(art_rows):
        tab.basis[r] = ncols + k

    if n_art:
        c1 = np.zeros(ncols + n_art)
        c1[ncols:] = -1.0
        red1, _ = tab.reduced_costs(c1)
        tab.run(red1, tol, max_iter, stall_limit, phase=1)
        art_total = sum(
            tab.t[r, -1] for r in range(tab.n_rows) if tab.basis[r] >= ncols
        )
        if art_total > feas_tol:
            return LpOutcome("infeasible", {}, None, tab.iterations)

        # Pivot remaining zero-level artificials out of the basis; a row with
        # no real column to pivot on is redundant and gets dropped.
        drop = []
        for r in range(tab.n_rows):
            if tab.basis[r] < ncols:
                continue
            real = np.flatnonzero(np.abs(tab.t[r, :ncols]) > tol)
            if real.size:
                tab.pivot(r, int(real[0]), red1)
            else:
                drop.append(r)
        if drop:
            keep = [r for r in range(tab.n_rows) if r not in drop]
            tab.t = tab.t[keep]
            tab.basis = tab.basis[keep]
        tab.t = np.delete(tab.t, np.s_[ncols : ncols + n_art], axis=1)

    red2, _ = tab.reduced_costs(lp.c)
    status = tab.run(red2, tol, max_iter, stall_limit, phase=2)
    if status == "unbounded":
        return LpOutcome("unbounded", {}, None, tab.iterations)

    col_values = np.zeros(ncols)
    col_values[tab.basis] = tab.t[:, -1]
    col_values[(col_values < 0) & (col_values > -1e-9)] = 0.0

    values = dict(lp.fixed)
    for name, cols in lp.var_columns.items():
        values[name] = float(
            sum(sign * col_values[col] for col, sign in cols) + lp.var_shift[name]
        )
    objective = float(lp.c @ col_values + lp.constant)
    return LpOutcome("optimal", values, objective, tab.iterations)


def solve_model(model: LinearModel, **kwargs) -> LpOutcome:
    """Convenience wrapper: standard-form conversion plus solve."""
    return solve_lp(to_standard_form(model), **kwargs)
