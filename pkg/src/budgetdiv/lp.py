"""Exact-rational linear programming via a dense two-phase tableau simplex.

All arithmetic is `fractions.Fraction`, so optima and optimizers are exact.
The pivot rule is Dantzig for the first 3*(rows+cols) pivots, then Bland's
rule, which guarantees termination.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

_ZERO = Fraction(0)
_ONE = Fraction(1)


@dataclass(frozen=True)
class LinearProgram:
    """maximize c.v  subject to  rows[j].v <= rhs[j]  and  v >= 0."""

    c: tuple
    rows: tuple
    rhs: tuple

    def __post_init__(self):
        c = tuple(Fraction(v) for v in self.c)
        rows = tuple(tuple(Fraction(v) for v in row) for row in self.rows)
        rhs = tuple(Fraction(v) for v in self.rhs)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "rhs", rhs)
        if len(rows) != len(rhs):
            raise ValueError("rows and rhs length mismatch")
        for row in rows:
            if len(row) != len(c):
                raise ValueError("row length does not match objective length")


@dataclass(frozen=True)
class LpResult:
    status: str
    value: Fraction = None
    x: tuple = None


def lp_solve(lp: LinearProgram) -> LpResult:
    """Solve an inequality-form LP exactly; never raises on valid input."""
    status, x, value = simplex_exact(lp.c, lp.rows, lp.rhs, (), ())
    if status != OPTIMAL:
        return LpResult(status)
    return LpResult(OPTIMAL, value, x)


def simplex_exact(c, rows_ub, rhs_ub, rows_eq, rhs_eq):
    """Two-phase exact simplex.

    maximize c.x  s.t.  rows_ub.x <= rhs_ub,  rows_eq.x == rhs_eq,  x >= 0.
    Returns (status, x, value) with x a tuple of Fractions.
    """
    nvar = len(c)
    n_ub = len(rows_ub)
    n_eq = len(rows_eq)
    nrows = n_ub + n_eq
    c = [Fraction(v) for v in c]

    # Column layout: structural | slacks | artificials | rhs.
    art_start = nvar + n_ub
    ncols = art_start + nrows + 1
    tableau = []
    basis = []
    need_art = []
    for r in range(nrows):
        if r < n_ub:
            coeffs = rows_ub[r]
            b = Fraction(rhs_ub[r])
            slack = r
        else:
            coeffs = rows_eq[r - n_ub]
            b = Fraction(rhs_eq[r - n_ub])
            slack = None
        row = [_ZERO] * ncols
        flip = b < 0
        for j in range(nvar):
            v = Fraction(coeffs[j])
            row[j] = -v if flip else v
        if slack is not None:
            row[nvar + slack] = -_ONE if flip else _ONE
        row[ncols - 1] = -b if flip else b
        tableau.append(row)
        if slack is not None and not flip:
            basis.append(nvar + slack)
            need_art.append(False)
        else:
            row[art_start + r] = _ONE
            basis.append(art_start + r)
            need_art.append(True)

    if any(need_art):
        # Phase 1: minimize the sum of artificials (maximize its negation).
        obj = [_ZERO] * ncols
        for r in range(nrows):
            if need_art[r]:
                row = tableau[r]
                for j in range(ncols):
                    if row[j]:
                        obj[j] -= row[j]
        for r in range(nrows):
            obj[basis[r]] = _ZERO
        status = _iterate(tableau, basis, obj, nrows, ncols, art_start)
        if status == UNBOUNDED or -obj[ncols - 1] > 0:
            return INFEASIBLE, None, None
        # Drive leftover artificials out of the basis; drop redundant rows.
        for r in range(nrows):
            if basis[r] >= art_start:
                row = tableau[r]
                for j in range(art_start):
                    if row[j]:
                        _pivot(tableau, basis, obj, r, j, ncols)
                        break

    # Phase 2.
    obj = [_ZERO] * ncols
    for j in range(nvar):
        obj[j] = -c[j]
    for r in range(nrows):
        coef = obj[basis[r]]
        if coef:
            row = tableau[r]
            for j in range(ncols):
                if row[j]:
                    obj[j] -= coef * row[j]
    status = _iterate(tableau, basis, obj, nrows, ncols, art_start)
    if status == UNBOUNDED:
        return UNBOUNDED, None, None
    x = [_ZERO] * nvar
    for r in range(nrows):
        if basis[r] < nvar:
            x[basis[r]] = tableau[r][ncols - 1]
    value = sum((c[j] * x[j] for j in range(nvar)), _ZERO)
    return OPTIMAL, tuple(x), value


def _iterate(tableau, basis, obj, nrows, ncols, art_start):
    """Run pivots until optimal/unbounded; Dantzig first, Bland afterwards."""
    dantzig_budget = 3 * (nrows + ncols)
    pivots = 0
    while True:
        pivots += 1
        col = -1
        if pivots <= dantzig_budget:
            best = _ZERO
            for j in range(art_start):
                v = obj[j]
                if v < best:
                    best = v
                    col = j
        else:
            for j in range(art_start):
                if obj[j] < 0:
                    col = j
                    break
        if col < 0:
            return OPTIMAL
        row = -1
        best_ratio = None
        for r in range(nrows):
            a = tableau[r][col]
            if a > 0:
                ratio = tableau[r][ncols - 1] / a
                if (best_ratio is None or ratio < best_ratio
                        or (ratio == best_ratio and basis[r] < basis[row])):
                    best_ratio = ratio
                    row = r
        if row < 0:
            return UNBOUNDED
        _pivot(tableau, basis, obj, row, col, ncols)


def _pivot(tableau, basis, obj, row, col, ncols):
    prow = tableau[row]
    piv = prow[col]
    if piv != 1:
        inv = _ONE / piv
        for j in range(ncols):
            if prow[j]:
                prow[j] *= inv
    for r, trow in enumerate(tableau):
        if r != row:
            f = trow[col]
            if f:
                for j in range(ncols):
                    if prow[j]:
                        trow[j] -= f * prow[j]
    f = obj[col]
    if f:
        for j in range(ncols):
            if prow[j]:
                obj[j] -= f * prow[j]
    basis[row] = col
