"""Exact rational linear programming: two-phase tableau simplex, Bland's rule.

Only small problems occur in this package (a few dozen columns at most), so
a dense tableau of exact rationals is plenty.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import gmpy2

from .rational import q

_Z = gmpy2.mpq(0)
_O = gmpy2.mpq(1)


def _mpq(v):
    v = q(v)
    return gmpy2.mpq(v.numerator, v.denominator)


def _frac(v) -> Fraction:
    return Fraction(int(v.numerator), int(v.denominator))

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LPResult:
    status: str
    x: list | None = None
    value: Fraction | None = None

    @property
    def ok(self) -> bool:
        return self.status == OPTIMAL


def _pivot(t: list[list[Fraction]], r: int, c: int) -> None:
    row = t[r]
    inv = _O / row[c]
    if inv != 1:
        row = [v * inv for v in row]
        t[r] = row
    nz = [j for j, v in enumerate(row) if v != 0]
    for i, other in enumerate(t):
        if i == r:
            continue
        f = other[c]
        if f != 0:
            for j in nz:
                other[j] -= f * row[j]


def _simplex(t: list[list[Fraction]], basis: list[int], allowed: int) -> str:
    """Maximize the objective stored in the last row (as reduced costs).

    The last row holds ``-c`` style reduced costs: a negative entry in column
    ``j`` means increasing ``x_j`` improves the objective.
    """
    m = len(t) - 1
    obj = t[-1]
    while True:
        enter = next((j for j in range(allowed) if obj[j] < 0), None)
        if enter is None:
            return OPTIMAL
        best = None
        leave = None
        for i in range(m):
            a = t[i][enter]
            if a > 0:
                ratio = t[i][-1] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave is None:
            return UNBOUNDED
        _pivot(t, leave, enter)
        basis[leave] = enter
        obj = t[-1]


def linprog(c, A_ub=(), b_ub=(), A_eq=(), b_eq=(), nonneg: bool = False) -> LPResult:
    """Maximize ``c.x`` subject to ``A_ub x <= b_ub`` and ``A_eq x = b_eq``.

    Variables are free unless ``nonneg`` is set. The tableau runs on gmpy2
    rationals; the returned point and value are exact Fractions.
    """
    c = [_mpq(v) for v in c]
    n = len(c)
    rows = [([_mpq(v) for v in a], _mpq(b), True) for a, b in zip(A_ub, b_ub)]
    rows += [([_mpq(v) for v in a], _mpq(b), False) for a, b in zip(A_eq, b_eq)]

    # columns: x+ (n), x- (n unless nonneg), slacks, then artificials only for
    # rows whose slack cannot start in the basis
    nx = n if nonneg else 2 * n
    n_slack = sum(1 for _, _, ineq in rows if ineq)
    needs_art = [not ineq or b < 0 for _, b, ineq in rows]
    art0 = nx + n_slack
    ncols = art0 + sum(needs_art)
    t: list[list] = []
    basis: list[int] = []
    s = 0
    a_idx = art0
    for (a, b, ineq), art in zip(rows, needs_art):
        row = [_Z] * (ncols + 1)
        for j in range(n):
            row[j] = a[j]
            if not nonneg:
                row[n + j] = -a[j]
        if ineq:
            row[nx + s] = _O
            slack = nx + s
            s += 1
        row[-1] = b
        if b < 0:
            row = [-v for v in row]
        if art:
            row[a_idx] = _O
            basis.append(a_idx)
            a_idx += 1
        else:
            basis.append(slack)
        t.append(row)

    if ncols > art0:
        # phase 1: maximize -(sum of artificials)
        obj = [_Z] * (ncols + 1)
        for j in range(art0, ncols):
            obj[j] = _O
        for row, art in zip(t, needs_art):
            if art:
                obj = [o - v for o, v in zip(obj, row)]
        t.append(obj)
        _simplex(t, basis, art0)
        if t[-1][-1] != 0:
            return LPResult(INFEASIBLE)
        t.pop()

        # drive artificials out of the basis; drop redundant rows
        i = 0
        while i < len(t):
            if basis[i] >= art0:
                col = next((j for j in range(art0) if t[i][j] != 0), None)
                if col is None:
                    del t[i]
                    del basis[i]
                    continue
                _pivot(t, i, col)
                basis[i] = col
            i += 1

    # phase 2
    cost = [_Z] * ncols
    for j in range(n):
        cost[j] = c[j]
        if not nonneg:
            cost[n + j] = -c[j]
    obj = [-v for v in cost] + [_Z]
    for i, bj in enumerate(basis):
        f = cost[bj]
        if f != 0:
            obj = [o + f * v for o, v in zip(obj, t[i])]
    t.append(obj)
    status = _simplex(t, basis, art0)
    if status == UNBOUNDED:
        return LPResult(UNBOUNDED)
    vals = [_Z] * ncols
    for i, bj in enumerate(basis):
        vals[bj] = t[i][-1]
    x = [vals[j] - (_Z if nonneg else vals[n + j]) for j in range(n)]
    value = sum((cj * xj for cj, xj in zip(c, x)), _Z)
    return LPResult(OPTIMAL, [_frac(v) for v in x], _frac(value))


def feasible_point(A_ub=(), b_ub=(), A_eq=(), b_eq=(), n: int | None = None):
    """Any exact point of the polyhedron, or None when it is empty."""
    if n is None:
        n = len(A_ub[0]) if A_ub else len(A_eq[0])
    res = linprog([0] * n, A_ub, b_ub, A_eq, b_eq)
    return res.x if res.ok else None
