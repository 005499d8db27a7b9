"""Linear programming: exact rational simplex and a float path through HiGHS.

The exact solver is a dense two-phase tableau simplex over ``Fraction`` with
Bland's rule.  Float problems go to ``scipy.optimize.linprog`` (HiGHS) with
tightened tolerances.

Dual values follow the sensitivity convention: ``duals[i]`` is the rate of
change of the optimal objective with respect to ``b[i]``, so for a problem
whose variables are all ``x >= 0`` the optimum equals ``sum(b[i] * duals[i])``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .._numeric import is_exact
from ..errors import DomainError, SolverError

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

FLOAT_TOL = 1e-9


@dataclass
class LPProblem:
    """``sense`` c.x subject to rows ``A[i].x  relations[i]  b[i]`` and bounds.

    ``relations`` entries are ``"<="``, ``"="`` or ``">="``.  ``bounds`` is a
    list of ``(lo, hi)`` pairs where ``None`` means unbounded on that side;
    the default is ``x >= 0`` for every variable.
    """

    c: Sequence
    A: Sequence
    relations: Sequence
    b: Sequence
    sense: str = "min"
    bounds: Sequence | None = None

    def __post_init__(self):
        n = len(self.c)
        if len(self.A) != len(self.b) or len(self.A) != len(self.relations):
            raise DomainError("A, relations and b must have the same number of rows")
        for row in self.A:
            if len(row) != n:
                raise DomainError("constraint row length does not match the objective")
        for r in self.relations:
            if r not in ("<=", "=", ">="):
                raise DomainError(f"unknown relation {r!r}")
        if self.sense not in ("min", "max"):
            raise DomainError("sense must be 'min' or 'max'")
        if self.bounds is not None and len(self.bounds) != n:
            raise DomainError("one bound pair per variable")

    @property
    def num_vars(self) -> int:
        return len(self.c)

    def is_exact(self) -> bool:
        vals = list(self.c) + list(self.b) + [v for row in self.A for v in row]
        if self.bounds is not None:
            vals += [v for pair in self.bounds for v in pair if v is not None]
        return is_exact(vals)


@dataclass
class LPSolution:
    status: str
    x: tuple | None = None
    objective: object = None
    duals: tuple | None = None
    iterations: int = 0
    exact: bool = False
    info: dict = field(default_factory=dict)

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


def solve_lp(problem: LPProblem, exact: bool | None = None) -> LPSolution:
    """Solve ``problem``; exact rational arithmetic when all data are rational."""
    if exact is None:
        exact = problem.is_exact()
    if exact:
        return _solve_exact(problem)
    return _solve_float(problem)


# --- float path -----------------------------------------------------------------

def _solve_float(problem: LPProblem) -> LPSolution:
    from scipy.optimize import linprog

    c = np.array([float(v) for v in problem.c])
    sign = -1.0 if problem.sense == "max" else 1.0
    ub_rows, ub_b, ub_idx, ub_sign = [], [], [], []
    eq_rows, eq_b, eq_idx = [], [], []
    for i, (row, rel, bi) in enumerate(zip(problem.A, problem.relations, problem.b)):
        r = [float(v) for v in row]
        if rel == "=":
            eq_rows.append(r)
            eq_b.append(float(bi))
            eq_idx.append(i)
        elif rel == "<=":
            ub_rows.append(r)
            ub_b.append(float(bi))
            ub_idx.append(i)
            ub_sign.append(1.0)
        else:
            ub_rows.append([-v for v in r])
            ub_b.append(-float(bi))
            ub_idx.append(i)
            ub_sign.append(-1.0)
    bounds = problem.bounds
    if bounds is None:
        bounds = [(0, None)] * problem.num_vars
    bounds = [(None if lo is None else float(lo), None if hi is None else float(hi))
              for lo, hi in bounds]
    res = linprog(
        sign * c,
        A_ub=np.array(ub_rows) if ub_rows else None,
        b_ub=np.array(ub_b) if ub_rows else None,
        A_eq=np.array(eq_rows) if eq_rows else None,
        b_eq=np.array(eq_b) if eq_rows else None,
        bounds=bounds,
        method="highs",
        options={"primal_feasibility_tolerance": 1e-10,
                 "dual_feasibility_tolerance": 1e-10},
    )
    if res.status == 2:
        return LPSolution(INFEASIBLE, iterations=int(res.nit))
    if res.status == 3:
        return LPSolution(UNBOUNDED, iterations=int(res.nit))
    if res.status != 0:
        raise SolverError(f"HiGHS failed: {res.message}")
    duals = [0.0] * len(problem.b)
    if ub_rows:
        for i, s, m in zip(ub_idx, ub_sign, res.ineqlin.marginals):
            duals[i] = sign * s * float(m)
    if eq_rows:
        for i, m in zip(eq_idx, res.eqlin.marginals):
            duals[i] = sign * float(m)
    return LPSolution(OPTIMAL, tuple(float(v) for v in res.x), sign * float(res.fun),
                      tuple(duals), int(res.nit), False)


# --- exact path -----------------------------------------------------------------

class _Tableau:
    """Dense simplex tableau over Fractions with an objective row."""

    def __init__(self, rows: list, rhs: list, basis: list):
        self.rows = rows
        self.rhs = rhs
        self.basis = basis
        self.obj: list = []
        self.obj_rhs = Fraction(0)
        self.iterations = 0

    def set_objective(self, cost: list):
        # reduced costs: c_j - sum_r c_B[r] * T[r][j]
        obj = list(cost)
        val = Fraction(0)
        for r, bv in enumerate(self.basis):
            cb = cost[bv]
            if cb:
                row = self.rows[r]
                for j, a in enumerate(row):
                    if a:
                        obj[j] -= cb * a
                val -= cb * self.rhs[r]
        self.obj = obj
        self.obj_rhs = val  # equals -(objective value)

    def pivot(self, r: int, j: int):
        row = self.rows[r]
        piv = row[j]
        if piv != 1:
            inv = 1 / piv
            row = [a * inv if a else a for a in row]
            self.rows[r] = row
            self.rhs[r] = self.rhs[r] * inv
        nz = [k for k, a in enumerate(row) if a]
        rr = self.rhs[r]
        for i, other in enumerate(self.rows):
            if i == r:
                continue
            f = other[j]
            if f:
                for k in nz:
                    other[k] -= f * row[k]
                self.rhs[i] -= f * rr
        f = self.obj[j]
        if f:
            for k in nz:
                self.obj[k] -= f * row[k]
            self.obj_rhs -= f * rr
        self.basis[r] = j
        self.iterations += 1

    def run(self, allowed: list) -> str:
        """Bland's rule until optimal or unbounded; ``allowed[j]`` gates entering."""
        while True:
            enter = -1
            for j, d in enumerate(self.obj):
                if d < 0 and allowed[j]:
                    enter = j
                    break
            if enter < 0:
                return OPTIMAL
            best = None
            leave = -1
            for i, row in enumerate(self.rows):
                a = row[enter]
                if a > 0:
                    ratio = self.rhs[i] / a
                    if best is None or ratio < best or (ratio == best and self.basis[i] < self.basis[leave]):
                        best = ratio
                        leave = i
            if leave < 0:
                return UNBOUNDED
            self.pivot(leave, enter)


def _solve_exact(problem: LPProblem) -> LPSolution:
    F = Fraction
    n = problem.num_vars
    bounds = problem.bounds or [(0, None)] * n
    # x_j = lo_j + x'_j  or  x_j = x+_j - x-_j when free
    cols = []  # (original var, sign)
    shift = [F(0)] * n
    extra_rows = []  # (coeffs over original vars, bound) for finite upper bounds
    for j, (lo, hi) in enumerate(bounds):
        if lo is None:
            cols.append((j, 1))
            cols.append((j, -1))
            if hi is not None:
                extra_rows.append((j, F(hi)))
        else:
            shift[j] = F(lo)
            cols.append((j, 1))
            if hi is not None:
                extra_rows.append((j, F(hi) - F(lo)))
    c = [F(v) for v in problem.c]
    if problem.sense == "max":
        c = [-v for v in c]
    A = [[F(v) for v in row] for row in problem.A]
    b = [F(v) for v in problem.b]
    rel = list(problem.relations)
    m_orig = len(A)
    for j, ub in extra_rows:
        row = [F(0)] * n
        row[j] = F(1)
        A.append(row)
        b.append(ub + shift[j] if bounds[j][0] is not None else ub)
        rel.append("<=")
    # substitute the shift into the right-hand sides
    for i, row in enumerate(A):
        b[i] -= sum((row[j] * shift[j] for j in range(n) if shift[j]), F(0))
    const = sum((c[j] * shift[j] for j in range(n)), F(0))
    m = len(A)
    ncols = len(cols)
    # structural columns, then one slack/surplus per inequality, then artificials
    slack_of = {}
    k = ncols
    for i in range(m):
        if rel[i] != "=":
            slack_of[i] = k
            k += 1
    nslack_end = k
    rows = []
    rhs = []
    basis = []
    row_sign = []
    art_cols = []
    init_col = []
    for i in range(m):
        row = [F(0)] * nslack_end
        for t, (j, s) in enumerate(cols):
            a = A[i][j]
            if a:
                row[t] = a if s == 1 else -a
        if rel[i] == "<=":
            row[slack_of[i]] = F(1)
        elif rel[i] == ">=":
            row[slack_of[i]] = F(-1)
        sgn = 1
        bi = b[i]
        if bi < 0:
            row = [-a for a in row]
            bi = -bi
            sgn = -1
        rows.append(row)
        rhs.append(bi)
        row_sign.append(sgn)
    total = nslack_end
    for i in range(m):
        if i in slack_of and rows[i][slack_of[i]] == 1:
            basis.append(slack_of[i])
            init_col.append(slack_of[i])
        else:
            basis.append(total)
            init_col.append(total)
            art_cols.append(total)
            total += 1
    for i in range(m):
        rows[i].extend([F(0)] * (total - nslack_end))
        if basis[i] >= nslack_end:
            rows[i][basis[i]] = F(1)
    row_id = list(range(m))
    tab = _Tableau(rows, rhs, basis)
    is_art = [False] * total
    for a in art_cols:
        is_art[a] = True
    if art_cols:
        tab.set_objective([F(1) if is_art[j] else F(0) for j in range(total)])
        tab.run([True] * total)
        if tab.obj_rhs != 0:
            return LPSolution(INFEASIBLE, iterations=tab.iterations, exact=True)
        # drive artificials out of the basis; drop redundant rows
        r = 0
        while r < len(tab.rows):
            if is_art[tab.basis[r]]:
                piv = next((j for j in range(total) if not is_art[j] and tab.rows[r][j] != 0), -1)
                if piv >= 0:
                    tab.pivot(r, piv)
                else:
                    # redundant row: record and remove it
                    del tab.rows[r]
                    del tab.rhs[r]
                    del tab.basis[r]
                    del init_col[r]
                    del row_sign[r]
                    del row_id[r]
                    continue
            r += 1
    cost = [F(0)] * total
    for t, (j, s) in enumerate(cols):
        cost[t] = c[j] if s == 1 else -c[j]
    tab.set_objective(cost)
    status = tab.run([not is_art[j] for j in range(total)])
    if status == UNBOUNDED:
        return LPSolution(UNBOUNDED, iterations=tab.iterations, exact=True)
    xcols = [F(0)] * total
    for r, bv in enumerate(tab.basis):
        xcols[bv] = tab.rhs[r]
    x = list(shift)
    for t, (j, s) in enumerate(cols):
        x[j] += xcols[t] if s == 1 else -xcols[t]
    obj = -tab.obj_rhs + const
    # duals from the reduced costs of the initial basis columns
    duals = [F(0)] * m
    for i, col, sgn in zip(row_id, init_col, row_sign):
        duals[i] = -tab.obj[col] * sgn
    if problem.sense == "max":
        obj = -obj
        duals = [-d for d in duals]
    return LPSolution(OPTIMAL, tuple(x), obj, tuple(duals[:m_orig]), tab.iterations, True,
                      {"bound_duals": tuple(duals[m_orig:])})

