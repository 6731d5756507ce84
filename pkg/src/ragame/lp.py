"""Exact rational linear programming.

A two-phase primal simplex over a sparse tableau of exact rationals.  Entering
columns are chosen by the most negative reduced cost; after a run of degenerate
pivots the solver switches to Bland's least-index rule for the rest of the
phase, which rules out cycling.  Every optimal solution carries a dual vector,
every infeasible verdict a Farkas vector and every unbounded verdict a ray.

Arithmetic uses ``gmpy2.mpq`` internally when available and returns
:class:`fractions.Fraction` values.

Dual sign convention: ``dual[i]`` is the derivative of the optimal value with
respect to ``rhs[i]``.  For a maximization this means ``y >= 0`` on ``<=`` rows
and ``y <= 0`` on ``>=`` rows (reversed for minimization), and the optimal value
equals ``sum(rhs[i] * dual[i])`` over the rows of :func:`canonical`.
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction

try:
    from gmpy2 import mpq as _Q
except ImportError:  # pragma: no cover
    _Q = Fraction

LE, EQ, GE = "<=", "=", ">="
_FLIP = {LE: GE, GE: LE, EQ: EQ}
DEGENERATE_STREAK = 50


class LpError(ValueError):
    """Malformed linear program."""


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    if type(x).__name__ == "mpq":
        return Fraction(int(x.numerator), int(x.denominator))
    raise LpError(f"LP data must be exact rationals, got {type(x).__name__}")


@dataclass(frozen=True)
class Constraint:
    coeffs: Mapping[int, Fraction]
    relation: str
    rhs: Fraction
    name: str | None = None


@dataclass
class LinearProgram:
    """``sense`` objective over ``num_vars`` variables.

    Coefficients may be given densely (length ``num_vars``) or as ``{index: value}``
    mappings.  ``bounds[j]`` is ``(lower, upper)`` with ``None`` for infinite;
    the default is ``(0, None)``.
    """

    num_vars: int
    sense: str = "max"
    objective: Mapping[int, Fraction] = field(default_factory=dict)
    constraints: list[Constraint] = field(default_factory=list)
    bounds: list[tuple[Fraction | None, Fraction | None]] | None = None
    var_names: list[str] | None = None

    def __post_init__(self):
        if self.sense not in ("max", "min"):
            raise LpError(f"sense must be 'max' or 'min', not {self.sense!r}")
        self.objective = self._coeffs(self.objective)
        self.constraints = [self._constraint(c) for c in self.constraints]
        if self.bounds is None:
            self.bounds = [(Fraction(0), None)] * self.num_vars
        else:
            if len(self.bounds) != self.num_vars:
                raise LpError("one bound pair per variable is required")
            self.bounds = [
                (None if lo is None else _frac(lo), None if hi is None else _frac(hi))
                for lo, hi in self.bounds
            ]

    def _coeffs(self, coeffs) -> dict[int, Fraction]:
        if isinstance(coeffs, Mapping):
            items = coeffs.items()
        else:
            coeffs = list(coeffs)
            if len(coeffs) != self.num_vars:
                raise LpError(f"coefficient vector of length {len(coeffs)} for {self.num_vars} variables")
            items = enumerate(coeffs)
        out = {}
        for j, v in items:
            if not 0 <= j < self.num_vars:
                raise LpError(f"variable index {j} out of range")
            v = _frac(v)
            if v:
                out[j] = v
        return out

    def _constraint(self, c) -> Constraint:
        if isinstance(c, Constraint):
            coeffs, rel, rhs, name = c.coeffs, c.relation, c.rhs, c.name
        else:
            coeffs, rel, rhs, *rest = c
            name = rest[0] if rest else None
        if rel not in (LE, EQ, GE):
            raise LpError(f"unknown relation {rel!r}")
        return Constraint(self._coeffs(coeffs), rel, _frac(rhs), name)

    def add(self, coeffs, relation: str, rhs, name: str | None = None) -> int:
        self.constraints.append(self._constraint((coeffs, relation, rhs, name)))
        return len(self.constraints) - 1

    def objective_value(self, x: Sequence[Fraction]) -> Fraction:
        return sum((v * x[j] for j, v in self.objective.items()), Fraction(0))


@dataclass
class LpSolution:
    status: str
    value: Fraction | None = None
    primal: list[Fraction] | None = None
    dual: list[Fraction] | None = None
    farkas: list[Fraction] | None = None
    ray: list[Fraction] | None = None
    pivots: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def canonical(lp: LinearProgram) -> LinearProgram:
    """Move every bound other than ``x >= 0`` / free into explicit rows.

    The resulting rows are the original constraints followed by one row per
    moved bound, in variable order (lower before upper).
    """
    rows = list(lp.constraints)
    bounds = []
    for j, (lo, hi) in enumerate(lp.bounds):
        if lo == 0:
            bounds.append((Fraction(0), None))
        else:
            bounds.append((None, None))
            if lo is not None:
                rows.append(Constraint({j: Fraction(1)}, GE, lo, f"lb{j}"))
        if hi is not None:
            rows.append(Constraint({j: Fraction(1)}, LE, hi, f"ub{j}"))
    return LinearProgram(lp.num_vars, lp.sense, dict(lp.objective), rows, bounds, lp.var_names)


class _Tableau:
    """Sparse simplex tableau; every row is kept in solved form for its basic column."""

    def __init__(self, rows, rhs, basis, ncols):
        self.rows: list[dict[int, object]] = rows
        self.rhs: list = rhs
        self.basis: list[int] = basis
        self.ncols = ncols
        self.obj: dict[int, object] = {}
        self.obj_val = _Q(0)
        self.pivots = 0

    def set_objective(self, cost: Mapping[int, object]) -> None:
        obj = {j: _Q(v) for j, v in cost.items() if v}
        val = _Q(0)
        for i, b in enumerate(self.basis):
            cb = obj.get(b)
            if cb:
                for j, v in self.rows[i].items():
                    nv = obj.get(j, 0) - cb * v
                    if nv:
                        obj[j] = nv
                    else:
                        obj.pop(j, None)
                val -= cb * self.rhs[i]
        self.obj = obj
        self.obj_val = val  # equals -(c_B B^-1 b)

    def pivot(self, r: int, c: int) -> None:
        prow = self.rows[r]
        inv = 1 / prow[c]
        for j in prow:
            prow[j] *= inv
        self.rhs[r] *= inv
        prow[c] = _Q(1)
        pitems = list(prow.items())
        prhs = self.rhs[r]
        for i, row in enumerate(self.rows):
            if i == r:
                continue
            f = row.get(c)
            if not f:
                continue
            for j, v in pitems:
                nv = row.get(j, 0) - f * v
                if nv:
                    row[j] = nv
                else:
                    del row[j]
            self.rhs[i] -= f * prhs
        f = self.obj.get(c)
        if f:
            for j, v in pitems:
                nv = self.obj.get(j, 0) - f * v
                if nv:
                    self.obj[j] = nv
                else:
                    del self.obj[j]
            self.obj_val -= f * prhs
        self.basis[r] = c
        self.pivots += 1

    def run(self, banned: set[int]) -> tuple[str, int | None]:
        """Minimize the current objective; returns ('optimal'|'unbounded', entering column)."""
        bland = False
        streak = 0
        while True:
            if bland:
                cands = [j for j, v in self.obj.items() if v < 0 and j not in banned]
                if not cands:
                    return "optimal", None
                c = min(cands)
            else:
                c, best = None, 0
                for j, v in self.obj.items():
                    if v < best and j not in banned:
                        c, best = j, v
                if c is None:
                    return "optimal", None
            r, ratio = None, None
            for i, row in enumerate(self.rows):
                a = row.get(c)
                if a is not None and a > 0:
                    t = self.rhs[i] / a
                    if ratio is None or t < ratio or (t == ratio and self.basis[i] < self.basis[r]):
                        r, ratio = i, t
            if r is None:
                return "unbounded", c
            if ratio == 0:
                streak += 1
                if streak > DEGENERATE_STREAK:
                    bland = True
            else:
                streak = 0
            self.pivot(r, c)


def solve(lp: LinearProgram) -> LpSolution:
    """Solve ``lp`` exactly.

    Returns status ``optimal`` (with primal, dual and value), ``infeasible``
    (with a Farkas vector over the canonical rows) or ``unbounded`` (with a
    feasible point in ``primal`` and an improving ray).
    """
    clp = canonical(lp)
    nv = clp.num_vars
    # structural columns: variable j -> column j; free variable j also -> a negative copy
    neg_col = {}
    ncols = nv
    for j, (lo, _) in enumerate(clp.bounds):
        if lo is None:
            neg_col[j] = ncols
            ncols += 1
    rows, rhs, basis, signs, ident = [], [], [], [], []
    artificial = set()
    extra = []
    for con in clp.constraints:
        sign = -1 if con.rhs < 0 else 1
        rel = con.relation if sign == 1 else _FLIP[con.relation]
        row = {}
        for j, v in con.coeffs.items():
            row[j] = _Q(sign * v)
            if j in neg_col:
                row[neg_col[j]] = _Q(-sign * v)
        extra.append((row, rel))
        rhs.append(_Q(sign * con.rhs))
        signs.append(sign)
    for row, rel in extra:
        if rel == LE:
            row[ncols] = _Q(1)
            ident.append(ncols)
            basis.append(ncols)
            ncols += 1
        else:
            if rel == GE:
                row[ncols] = _Q(-1)
                ncols += 1
            row[ncols] = _Q(1)
            artificial.add(ncols)
            ident.append(ncols)
            basis.append(ncols)
            ncols += 1
        rows.append(row)
    tab = _Tableau(rows, rhs, basis, ncols)

    if artificial:
        tab.set_objective({j: 1 for j in artificial})
        tab.run(banned=set())
        if -tab.obj_val > 0:
            y1 = [-tab.obj.get(ident[i], 0) + (1 if ident[i] in artificial else 0) for i in range(len(rows))]
            farkas = [_frac(signs[i] * y1[i]) for i in range(len(rows))]
            return LpSolution("infeasible", farkas=farkas, pivots=tab.pivots)
        # drive zero-level artificials out of the basis where possible
        for i, b in enumerate(tab.basis):
            if b in artificial:
                for j, v in tab.rows[i].items():
                    if j not in artificial and v:
                        tab.pivot(i, j)
                        break

    s = -1 if clp.sense == "max" else 1
    cost = {}
    for j, v in clp.objective.items():
        cost[j] = s * v
        if j in neg_col:
            cost[neg_col[j]] = -s * v
    tab.set_objective(cost)
    status, entering = tab.run(banned=artificial)

    xcol = [_Q(0)] * ncols
    for i, b in enumerate(tab.basis):
        xcol[b] = tab.rhs[i]

    def structural(vec):
        out = []
        for j in range(nv):
            v = vec[j]
            if j in neg_col:
                v = v - vec[neg_col[j]]
            out.append(_frac(v))
        return out

    primal = structural(xcol)
    if status == "unbounded":
        d = [_Q(0)] * ncols
        d[entering] = _Q(1)
        for i, b in enumerate(tab.basis):
            a = tab.rows[i].get(entering)
            if a:
                d[b] = -a
        return LpSolution("unbounded", primal=primal, ray=structural(d), pivots=tab.pivots)

    y_int = [-tab.obj.get(ident[i], 0) for i in range(len(rows))]
    dual = [_frac(s * signs[i] * y_int[i]) for i in range(len(rows))]
    value = lp.objective_value(primal)
    return LpSolution("optimal", value=value, primal=primal, dual=dual, pivots=tab.pivots)


@dataclass
class FeasibilityReport:
    feasible: bool
    violations: list[str]

    def __bool__(self) -> bool:
        return self.feasible


def _holds(lhs: Fraction, rel: str, rhs: Fraction) -> bool:
    if rel == LE:
        return lhs <= rhs
    if rel == GE:
        return lhs >= rhs
    return lhs == rhs


def check_feasible(lp: LinearProgram, point: Sequence) -> FeasibilityReport:
    """Exact check of every constraint and bound at ``point``."""
    if len(point) != lp.num_vars:
        raise LpError(f"point has {len(point)} entries for {lp.num_vars} variables")
    x = [_frac(v) for v in point]
    bad = []
    for i, con in enumerate(lp.constraints):
        lhs = sum((v * x[j] for j, v in con.coeffs.items()), Fraction(0))
        if not _holds(lhs, con.relation, con.rhs):
            label = con.name or f"row {i}"
            bad.append(f"{label}: {lhs} {con.relation} {con.rhs} fails")
    for j, (lo, hi) in enumerate(lp.bounds):
        if lo is not None and x[j] < lo:
            bad.append(f"x{j} = {x[j]} below lower bound {lo}")
        if hi is not None and x[j] > hi:
            bad.append(f"x{j} = {x[j]} above upper bound {hi}")
    return FeasibilityReport(not bad, bad)


def dual_of(lp: LinearProgram) -> LinearProgram:
    """LP dual of ``canonical(lp)``; dual variable ``i`` belongs to canonical row ``i``."""
    clp = canonical(lp)
    m = len(clp.constraints)
    maximize = clp.sense == "max"
    bounds = []
    for con in clp.constraints:
        if con.relation == EQ:
            bounds.append((None, None))
        elif (con.relation == LE) == maximize:
            bounds.append((Fraction(0), None))
        else:
            bounds.append((None, Fraction(0)))
    columns: list[dict[int, Fraction]] = [{} for _ in range(clp.num_vars)]
    for i, con in enumerate(clp.constraints):
        for j, v in con.coeffs.items():
            columns[j][i] = v
    rows = []
    for j, (lo, _) in enumerate(clp.bounds):
        if lo is None:
            rel = EQ
        else:
            rel = GE if maximize else LE
        rows.append(Constraint(columns[j], rel, clp.objective.get(j, Fraction(0)), f"dual{j}"))
    objective = {i: con.rhs for i, con in enumerate(clp.constraints) if con.rhs}
    return LinearProgram(m, "min" if maximize else "max", objective, rows, bounds)


def verify_farkas(lp: LinearProgram, z: Sequence[Fraction]) -> bool:
    """True iff ``z`` certifies infeasibility of ``canonical(lp)``."""
    clp = canonical(lp)
    if len(z) != len(clp.constraints):
        return False
    zb = Fraction(0)
    colsum = [Fraction(0)] * clp.num_vars
    for zi, con in zip(z, clp.constraints):
        if con.relation == LE and zi > 0 or con.relation == GE and zi < 0:
            return False
        zb += zi * con.rhs
        for j, v in con.coeffs.items():
            colsum[j] += zi * v
    for j, (lo, _) in enumerate(clp.bounds):
        if lo is None and colsum[j] != 0 or lo is not None and colsum[j] > 0:
            return False
    return zb > 0


def verify_ray(lp: LinearProgram, d: Sequence[Fraction]) -> bool:
    """True iff ``d`` is a recession direction of ``canonical(lp)`` improving the objective."""
    clp = canonical(lp)
    for con in clp.constraints:
        lhs = sum((v * d[j] for j, v in con.coeffs.items()), Fraction(0))
        if not _holds(lhs, con.relation, Fraction(0)):
            return False
    for j, (lo, _) in enumerate(clp.bounds):
        if lo is not None and d[j] < 0:
            return False
    gain = clp.objective_value(d)
    return gain > 0 if clp.sense == "max" else gain < 0


def dual_objective(lp: LinearProgram, y: Sequence[Fraction]) -> Fraction:
    clp = canonical(lp)
    return sum((yi * con.rhs for yi, con in zip(y, clp.constraints)), Fraction(0))


def _term(v: Fraction, name: str, first: bool) -> str:
    sign = "-" if v < 0 else ("" if first else "+")
    mag = abs(v)
    coef = "" if mag == 1 else (f"{mag.numerator}" if mag.denominator == 1 else f"{mag.numerator}/{mag.denominator}") + " "
    return f"{sign} {coef}{name}".strip() if first else f"{sign} {coef}{name}"


def _expr(coeffs: Mapping[int, Fraction], names: Sequence[str]) -> str:
    if not coeffs:
        return "0 " + names[0] if names else "0"
    parts = [_term(v, names[j], k == 0) for k, (j, v) in enumerate(sorted(coeffs.items()))]
    return " ".join(parts)


def _num(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def to_lp_format(lp: LinearProgram) -> str:
    """CPLEX-style LP text with exact coefficients written as ``p/q``."""
    names = lp.var_names or [f"x{j}" for j in range(lp.num_vars)]
    out = ["\\ exact rational coefficients are written as p/q"]
    out.append("Maximize" if lp.sense == "max" else "Minimize")
    out.append(f" obj: {_expr(lp.objective, names)}")
    out.append("Subject To")
    for i, con in enumerate(lp.constraints):
        label = con.name or f"c{i}"
        out.append(f" {label}: {_expr(con.coeffs, names)} {con.relation} {_num(con.rhs)}")
    out.append("Bounds")
    for j, (lo, hi) in enumerate(lp.bounds):
        if lo is None and hi is None:
            out.append(f" {names[j]} free")
        elif lo is None:
            out.append(f" -inf <= {names[j]} <= {_num(hi)}")
        elif hi is None:
            if lo != 0:
                out.append(f" {names[j]} >= {_num(lo)}")
        else:
            out.append(f" {_num(lo)} <= {names[j]} <= {_num(hi)}")
    out.append("End")
    return "\n".join(out) + "\n"
