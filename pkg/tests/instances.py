"""Seeded random affine-polyhedral instances for the property suites."""
from fractions import Fraction

import numpy as np

from scd_stab.polyhedra import PolyhedralSet
from scd_stab.problem import GEProblem
from scd_stab.rational import matvec, rank


def _coordinate_set(rng, i, k):
    """Rows for one factor of D: a half-line, a line or a slab in coordinate i."""
    e = [0] * k
    e[i] = 1
    minus = [-x for x in e]
    kind = rng.choice(["lower", "upper", "line", "slab"], p=[0.35, 0.15, 0.15, 0.35])
    lo = int(rng.integers(-1, 2))
    if kind == "lower":
        return [minus], [-lo], (lo, None)
    if kind == "upper":
        return [e], [lo], (None, lo)
    if kind == "line":
        return [], [], (None, None)
    hi = lo + int(rng.integers(1, 3))
    return [e, minus], [hi, -lo], (lo, hi)


def _pick(rng, lo, hi):
    """A point of [lo, hi] and an admissible normal vector there."""
    choices = []
    if lo is not None:
        choices.append("lo")
    if hi is not None:
        choices.append("hi")
    choices.append("inside")
    c = rng.choice(choices)
    mult = Fraction(int(rng.integers(0, 3)))  # zero multipliers make degenerate corners
    if c == "lo":
        return Fraction(lo), -mult
    if c == "hi":
        return Fraction(hi), mult
    if lo is not None and hi is not None:
        return Fraction(lo + hi, 2), Fraction(0)
    base = lo if lo is not None else hi if hi is not None else 0
    step = 1 if lo is not None else -1
    return Fraction(base + (step if (lo is not None or hi is not None) else 0)), Fraction(0)


def random_instance(seed: int, l: int | None = None, k: int | None = None) -> GEProblem:
    rng = np.random.default_rng(seed)
    l = int(rng.integers(1, 4)) if l is None else l
    k = int(rng.integers(1, 4)) if k is None else k
    n = l + k
    A, b, d, dstar = [], [], [], []
    for i in range(k):
        rows, rhs, (lo, hi) = _coordinate_set(rng, i, k)
        A += rows
        b += rhs
        di, si = _pick(rng, lo, hi)
        d.append(di)
        dstar.append(si)
    D = PolyhedralSet(k, A, b)
    sparse = lambda shape, p: (rng.integers(-2, 3, size=shape) * (rng.random(shape) < p)).tolist()
    while True:
        Jg = sparse((k, n), 0.5)
        for i in range(k):  # lean on the y-block so solutions are often isolated
            if rng.random() < 0.7:
                Jg[i][l + i] = int(rng.choice([-1, 1, 2]))
        if rank(Jg) == k:
            break
    Jf = sparse((k, n), 0.45)
    xbar = [Fraction(int(v)) for v in rng.integers(-1, 2, size=l)]
    ybar = [Fraction(int(v)) for v in rng.integers(-1, 2, size=k)]
    z = xbar + ybar
    g0 = [di - v for di, v in zip(d, matvec(Jg, z))]
    f0 = [-si - v for si, v in zip(dstar, matvec(Jf, z))]
    return GEProblem(l, k, xbar, ybar, Jf, Jg, D, f0=f0, g0=g0, name=f"random-{seed}")


def suite(count: int = 200, base_seed: int = 20240):
    return [random_instance(base_seed + i) for i in range(count)]
