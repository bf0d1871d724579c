"""Exact linear algebra over the rationals.

Matrices are plain lists of rows of :class:`fractions.Fraction`; vectors are
lists. Everything here is small-dimensional, so clarity beats speed.
"""
from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence

Vector = list
Matrix = list

ZERO = Fraction(0)
ONE = Fraction(1)


def q(value) -> Fraction:
    """Convert a number or a ``"p/q"`` / decimal string to an exact Fraction.

    Floats are converted exactly (binary expansion); strings are parsed
    literally, so ``"0.1"`` becomes ``1/10``.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, float):
        if value != value or value in (float("inf"), float("-inf")):
            raise ValueError(f"non-finite number {value!r}")
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    if hasattr(value, "item"):  # numpy scalar
        return q(value.item())
    raise TypeError(f"cannot convert {value!r} to a rational")


def qvec(values: Iterable) -> Vector:
    return [q(v) for v in values]


def qmat(rows: Iterable[Iterable]) -> Matrix:
    return [qvec(r) for r in rows]


def fmt(x: Fraction) -> str:
    """Render a rational as ``"p"`` or ``"p/q"``."""
    x = q(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def fmt_vec(v: Sequence) -> list[str]:
    return [fmt(x) for x in v]


def fmt_mat(m: Sequence[Sequence]) -> list[list[str]]:
    return [fmt_vec(r) for r in m]


def zeros(rows: int, cols: int) -> Matrix:
    return [[ZERO] * cols for _ in range(rows)]


def identity(n: int) -> Matrix:
    return [[ONE if i == j else ZERO for j in range(n)] for i in range(n)]


def transpose(m: Matrix, ncols: int = 0) -> Matrix:
    if not m:
        return [[] for _ in range(ncols)]
    return [list(col) for col in zip(*m)]


def dot(a: Sequence, b: Sequence) -> Fraction:
    s = ZERO
    for x, y in zip(a, b):
        if x and y:
            s += x * y
    return s


def matvec(m: Matrix, v: Sequence) -> Vector:
    return [dot(row, v) for row in m]


def matmul(a: Matrix, b: Matrix) -> Matrix:
    bt = transpose(b)
    if not bt:
        return [[] for _ in a]
    return [[dot(row, col) for col in bt] for row in a]


def vsub(a: Sequence, b: Sequence) -> Vector:
    return [x - y for x, y in zip(a, b)]


def vadd(a: Sequence, b: Sequence) -> Vector:
    return [x + y for x, y in zip(a, b)]


def vscale(c, a: Sequence) -> Vector:
    return [c * x for x in a]


def is_zero(v: Sequence) -> bool:
    return all(x == 0 for x in v)


def hstack(*blocks: Matrix) -> Matrix:
    rows = max(len(b) for b in blocks)
    return [sum((list(b[i]) for b in blocks), []) for i in range(rows)]


def vstack(*blocks: Matrix) -> Matrix:
    return [list(r) for b in blocks for r in b]


def block(rows: list[list[Matrix]]) -> Matrix:
    return vstack(*[hstack(*r) for r in rows])


def rref(m: Matrix, ncols: int | None = None) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form and pivot columns (entries coerced to Fractions)."""
    a = [[x if isinstance(x, Fraction) else q(x) for x in r] for r in m]
    if not a:
        return [], []
    n = len(a[0]) if ncols is None else ncols
    pivots: list[int] = []
    r = 0
    for c in range(n):
        p = next((i for i in range(r, len(a)) if a[i][c] != 0), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        inv = 1 / a[r][c]
        a[r] = [x * inv for x in a[r]]
        for i in range(len(a)):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == len(a):
            break
    return a[:r], pivots


def rank(m: Matrix) -> int:
    return len(rref(m)[1])


def nullspace(m: Matrix, ncols: int) -> list[Vector]:
    """Basis of ``{x : m x = 0}`` with one free variable set to 1 per vector."""
    if not m:
        return [[ONE if i == j else ZERO for i in range(ncols)] for j in range(ncols)]
    r, piv = rref(m, ncols)
    free = [j for j in range(ncols) if j not in piv]
    basis = []
    for f in free:
        v = [ZERO] * ncols
        v[f] = ONE
        for row, pc in zip(r, piv):
            v[pc] = -row[f]
        basis.append(v)
    return basis


def row_basis(m: Matrix, ncols: int) -> Matrix:
    return rref(m, ncols)[0]


def column_basis(cols: list[Vector], dim: int) -> list[Vector]:
    """Linearly independent subset of ``cols`` spanning the same space."""
    if not cols:
        return []
    _, piv = rref(transpose(cols), len(cols))
    return [list(cols[j]) for j in piv]


def complement_basis(cols: list[Vector], dim: int) -> list[Vector]:
    """Basis of the orthogonal complement of ``span(cols)`` in Q^dim."""
    return nullspace([list(c) for c in cols], dim) if cols else nullspace([], dim)


def inverse(m: Matrix) -> Matrix:
    n = len(m)
    aug = [list(m[i]) + identity(n)[i] for i in range(n)]
    r, piv = rref(aug, n)
    if piv != list(range(n)):
        raise ValueError("matrix is singular")
    return [row[n:] for row in r]


def in_span(v: Vector, cols: list[Vector]) -> bool:
    if is_zero(v):
        return True
    if not cols:
        return False
    return rank(transpose(cols + [v])) == rank(transpose(cols))


def primitive(v: Sequence[Fraction]) -> Vector:
    """Scale a nonzero rational vector to coprime integers (direction kept)."""
    from math import gcd, lcm

    den = 1
    for x in v:
        den = lcm(den, x.denominator)
    ints = [int(x * den) for x in v]
    g = 0
    for x in ints:
        g = gcd(g, abs(x))
    if g == 0:
        return [ZERO] * len(v)
    return [Fraction(x // g) for x in ints]


def to_float(m) -> list:
    if m and isinstance(m[0], (list, tuple)):
        return [[float(x) for x in r] for r in m]
    return [float(x) for x in m]
