"""Sampling ground truth for affine-polyhedral generalized equations.

The solution graph ``{(x,y) : 0 ∈ f(x,y) + N_D(g(x,y))}`` is assembled as a
finite union of polyhedra, one per nonempty face of ``D``. Random probes then
look for calmness violations. A reported violation is an exact rational
counterexample; "consistent" is only evidence.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import sqrt

import numpy as np

from . import lp
from .polyhedra import PolyhedralCone, PolyhedralSet, cone_is_trivial, in_normal_graph, set_faces
from .problem import GEProblem, ProblemError
from .rational import ZERO, dot, fmt, fmt_vec, is_zero, q, qvec, vsub

GENERATOR = "PCG64"
RADII = 7  # probes on spheres of radius * 2**-j, j = 0..6
PROBES_PER_ANCHOR = 50
DENOM = 2**20  # random floats are rounded to this grid to become rationals


class OracleError(ValueError):
    pass


@dataclass(frozen=True)
class SolutionGraph:
    """``gph Σ`` as a union of polyhedra in ``R^(l+k)``."""

    l: int
    k: int
    pieces: tuple  # PolyhedralSet in R^(l+k)
    faces: tuple  # active rows of D behind each piece
    reference: tuple
    problem: GEProblem | None = field(default=None, compare=False)

    def contains(self, z) -> bool:
        z = qvec(z)
        return any(P.contains(z) for P in self.pieces)

    def is_solution(self, x, y) -> bool:
        """Direct test of ``0 ∈ f(x,y) + N_D(g(x,y))`` (needs the problem)."""
        p = self.problem
        if p is None:
            return self.contains(list(x) + list(y))
        return in_normal_graph(p.D, p.g(x, y), [-v for v in p.f(x, y)])

    def fiber(self, x) -> list[PolyhedralSet]:
        """``Σ(x)`` piece by piece, as polyhedra in ``R^k`` (empty ones dropped)."""
        x = qvec(x)
        out = []
        for P in self.pieces:
            A = [list(a[self.l :]) for a in P.A]
            b = [bi - dot(a[: self.l], x) for a, bi in zip(P.A, P.b)]
            S = PolyhedralSet(self.k, A, b)
            if not S.is_empty():
                out.append(S)
        return out

    def points(self, x) -> set | None:
        """The finite set ``Σ(x)``, or None if some piece has a non-singleton fiber."""
        out = set()
        for S in self.fiber(x):
            pt = lp.feasible_point(S.A, S.b, n=S.dim) if S.A else None
            if pt is None:
                return None
            if not cone_is_trivial(PolyhedralCone(S.dim, [S.A[i] for i in S.active(pt)])).trivial:
                return None
            out.add(tuple(pt))
        return out


def _equality(rows, rhs, row, value):
    rows += [row, [-x for x in row]]
    rhs += [value, -value]


def build_solution_graph(p: GEProblem) -> SolutionGraph:
    """One piece per nonempty face ``Φ`` of ``D``: ``g ∈ Φ`` and ``-f ∈ N_D(relint Φ)``."""
    if not p.affine:
        raise ProblemError("oracle requires affine data", "f0" if p.f0 is None else "g0")
    p.validate()
    n, k = p.l + p.k, p.k
    Jf = [list(r) for r in p.Jf]
    Jg = [list(r) for r in p.Jg]
    D = p.D
    pieces, faces = [], []
    for face in set_faces(D):
        rows, rhs = [], []
        for i, (a, bi) in enumerate(zip(D.A, D.b)):
            row = [dot(a, [r[j] for r in Jg]) for j in range(n)]
            value = bi - dot(a, p.g0)
            if i in face.active:
                _equality(rows, rhs, row, value)
            else:
                rows.append(row)
                rhs.append(value)
        # the normal cone on the relative interior of the face is generated
        # by its active rows; use its H-form through the tangent cone's generators
        T = PolyhedralCone(k, [D.A[i] for i in sorted(face.active)])
        lin, rays = T.generators
        for r in rays:  # r . (-f) <= 0
            rows.append([-dot(r, [row[j] for row in Jf]) for j in range(n)])
            rhs.append(dot(r, p.f0))
        for b in lin:  # b . f = 0
            _equality(rows, rhs, [dot(b, [row[j] for row in Jf]) for j in range(n)], -dot(b, p.f0))
        piece = PolyhedralSet(n, rows, rhs)
        if rows and piece.is_empty():
            continue
        pieces.append(piece)
        faces.append(sorted(face.active))
    G = SolutionGraph(p.l, p.k, tuple(pieces), tuple(tuple(f) for f in faces), tuple(p.point), p)
    if not G.contains(p.point):
        raise OracleError("reference point is not covered by the pieces")
    return G


def closed_form_two_branch(x) -> frozenset:
    """Solutions of ``0 ∈ -y + N_{R_+}(y - x)``: ``{0, x}`` for ``x <= 0``, else none."""
    x = q(x)
    if x > 0:
        return frozenset()
    return frozenset({ZERO, x})


# ---------------------------------------------------------------------------
# calmness around the reference


@dataclass(frozen=True)
class CalmnessReport:
    verdict: str  # "consistent" or "violated"
    seed: int
    samples: int
    anchors: int
    probes: int
    empty_probes: int  # probes where no anchor piece meets the neighborhood
    modulus_sq: Fraction  # largest observed squared ratio
    radius: Fraction
    kappa: Fraction
    neighborhood: Fraction
    quadruple: dict | None = None

    @property
    def violated(self) -> bool:
        return self.verdict == "violated"

    @property
    def modulus(self) -> float:
        return float("inf") if self.modulus_sq < 0 else sqrt(self.modulus_sq)

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "seed": self.seed,
            "generator": GENERATOR,
            "samples": self.samples,
            "anchors": self.anchors,
            "probes": self.probes,
            "empty_probes": self.empty_probes,
            "modulus": "inf" if self.modulus_sq < 0 else f"{self.modulus:.12g}",
            "modulus_squared": "inf" if self.modulus_sq < 0 else fmt(self.modulus_sq),
            "radius": fmt(self.radius),
            "kappa": fmt(self.kappa),
            "neighborhood": fmt(self.neighborhood),
            "quadruple": self.quadruple,
        }


def _rational(values, scale=1) -> list:
    return [Fraction(int(round(float(v) * DENOM)), DENOM) * scale for v in values]


def _sqnorm(v) -> Fraction:
    return sum((x * x for x in v), ZERO)


def _box(center, h):
    n = len(center)
    A, b = [], []
    for i in range(n):
        e = [ZERO] * n
        e[i] = Fraction(1)
        A += [e, [-x for x in e]]
        b += [center[i] + h, h - center[i]]
    return A, b


def _sample_anchors(G: SolutionGraph, rng, count: int, radius: Fraction) -> list:
    """Exact graph points near the reference: the reference itself plus
    random convex combinations of vertices of ``piece ∩ box``."""
    ref = list(G.reference)
    n = G.l + G.k
    h = radius / n  # the box lies inside the Euclidean ball of the given radius
    bA, bb = _box(ref, h)
    pools = []
    for P in G.pieces:
        verts = []
        for _ in range(n + 1):
            c = rng.integers(-4, 5, size=n).tolist()
            res = lp.linprog(c, list(P.A) + bA, list(P.b) + bb)
            if not res.ok:
                break
            if res.x not in verts:
                verts.append(res.x)
        if verts:
            pools.append(verts)
    anchors = [ref]
    while len(anchors) < count and pools:
        verts = pools[int(rng.integers(len(pools)))]
        w = [Fraction(int(t)) for t in rng.integers(1, 9, size=len(verts))]
        s = sum(w)
        z = [sum((wi * v[j] for wi, v in zip(w, verts)), ZERO) / s for j in range(n)]
        anchors.append(z)
    return anchors


def _fiber_violation(G: SolutionGraph, P: PolyhedralSet, z, U: Fraction):
    """A second point ``(x, y')`` of ``P`` near ``z = (x, y)``, if the fiber is not isolated."""
    l, k = G.l, G.k
    act = P.active(z)
    cone = PolyhedralCone(k, [P.A[i][l:] for i in act])
    t = cone_is_trivial(cone)
    if t.trivial:
        return None
    v = t.witness
    step = U / max(abs(x) for x in v)
    for a, bi in zip(P.A, P.b):
        av = dot(a[l:], v)
        if av > 0:
            step = min(step, (bi - dot(a, z)) / av)
    y2 = [yi + step * vi for yi, vi in zip(z[l:], v)]
    return z[:l], y2


def _probe(G: SolutionGraph, P: PolyhedralSet, z, du, c, U: Fraction):
    """Exact point of ``Σ_P(x + du)`` within ``U`` of ``y`` maximizing ``c.(y' - y)``.

    Only rows active at ``z`` enter the LP; if an inactive row is crossed the
    probe is pulled back along the segment to ``z``, which keeps the ratio.
    """
    l, k = G.l, G.k
    x, y = z[:l], z[l:]
    act = P.active(z)
    A = [list(P.A[i][l:]) for i in act]
    b = [-dot(P.A[i][:l], du) for i in act]  # a_y.dv <= -a_x.du, in dv = y' - y
    bA, bb = _box([ZERO] * k, U)
    res = lp.linprog(c, A + bA, b + bb)
    if not res.ok:
        return None
    dv = res.x
    s = Fraction(1)
    for a, bi in zip(P.A, P.b):
        ad = dot(a[:l], du) + dot(a[l:], dv)
        if ad > 0:
            s = min(s, (bi - dot(a, z)) / ad)
    x2 = [xi + s * d for xi, d in zip(x, du)]
    y2 = [yi + s * d for yi, d in zip(y, dv)]
    return x2, y2


def _quadruple(x, y, x2, y2) -> dict:
    return {"x": fmt_vec(x), "y": fmt_vec(y), "x_probe": fmt_vec(x2), "y_probe": fmt_vec(y2)}


def _confirm(G: SolutionGraph, x, y, x2, y2, kappa: Fraction) -> bool:
    """Exact recheck of a violating quadruple."""
    if not (G.is_solution(x, y) and G.is_solution(x2, y2)):
        return False
    dy, dx = _sqnorm(vsub(y2, y)), _sqnorm(vsub(x2, x))
    return dy > kappa * kappa * dx


def _anchor_task(args):
    G, z, n_probes, seed_seq, radius, kappa, U = args
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    l, k = G.l, G.k
    mine = [P for P in G.pieces if P.contains(z)]
    x, y = z[:l], z[l:]
    for P in mine:
        hit = _fiber_violation(G, P, z, U)
        if hit is not None and _confirm(G, x, y, hit[0], hit[1], kappa):
            return -1, 0, 0, _quadruple(x, y, *hit)
    best, probes, empty = ZERO, 0, 0
    if l == 0:
        return best, probes, empty, None
    for i in range(n_probes):
        r = radius / 2 ** (i % RADII)
        u = rng.standard_normal(l)
        u = u / np.linalg.norm(u)
        du = _rational(u, r)
        c = _rational(rng.standard_normal(k))
        if is_zero(du):
            continue
        probes += 1
        found = False
        for P in mine:
            hit = _probe(G, P, z, du, c, U)
            if hit is None:
                continue
            found = True
            x2, y2 = hit
            dx = _sqnorm(vsub(x2, x))
            if dx == 0:
                continue
            ratio = _sqnorm(vsub(y2, y)) / dx
            if ratio > kappa * kappa and _confirm(G, x, y, x2, y2, kappa):
                return -1, probes, empty, _quadruple(x, y, x2, y2)
            best = max(best, ratio)
        empty += not found
    return best, probes, empty, None


def verify_isolated_calmness_around(
    G: SolutionGraph, radius=Fraction(1, 10), kappa=2, samples: int = 1000, seed: int = 0, workers: int = 1
) -> CalmnessReport:
    """Search for ``y' ∈ Σ(x')`` near ``y`` with ``|y' - y| > κ |x' - x|`` around the reference.

    Anchors ``(x, y)`` are exact graph points within ``radius`` of the
    reference. At each anchor the fiber ``Σ(x)`` is first tested for
    isolation exactly, then probes ``x'`` are drawn on spheres of radius
    ``radius * 2**-j``. Only pieces through the anchor are probed, which is
    the limit of shrinking neighborhoods; ``neighborhood = radius / 10``
    bounds ``|y' - y|`` in the max-norm.
    """
    radius, kappa = q(radius), q(kappa)
    if radius <= 0 or kappa <= 0:
        raise OracleError("radius and kappa must be positive")
    if samples < 1:
        raise OracleError("samples must be positive")
    U = radius / 10
    root = np.random.SeedSequence(seed)
    anchor_seq, *probe_seqs = root.spawn(1 + max(1, samples // PROBES_PER_ANCHOR))
    rng = np.random.Generator(np.random.PCG64(anchor_seq))
    anchors = _sample_anchors(G, rng, len(probe_seqs), radius)
    per = samples // len(anchors)
    extra = samples - per * len(anchors)
    tasks = [
        (G, z, per + (i < extra), probe_seqs[i], radius, kappa, U) for i, z in enumerate(anchors)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_anchor_task, tasks, chunksize=4))
    else:
        results = [_anchor_task(t) for t in tasks]
    best, probes, empty, quad = ZERO, 0, 0, None
    for r, n_p, n_e, qd in results:
        probes += n_p
        empty += n_e
        if qd is not None and quad is None:
            quad, best = qd, Fraction(-1)
        elif quad is None:
            best = max(best, r)
    return CalmnessReport(
        "violated" if quad else "consistent", seed, samples, len(anchors), probes, empty,
        best, radius, kappa, U, quad,
    )


# ---------------------------------------------------------------------------
# semismooth* sanity harness


@dataclass(frozen=True)
class SemismoothReport:
    verdict: str
    radii: tuple  # for each epsilon, the first ball radius on which every sample passed (or None)
    samples: int

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "radii": [None if r is None else fmt(r) for r in self.radii],
            "samples": self.samples,
        }


def _regular_normal_generators(pieces, z):
    """Generators of the regular normal cone to the union at ``z``."""
    dim = len(z)
    rows = []
    for P in pieces:
        if not P.contains(z):
            continue
        lin, rays = PolyhedralCone(dim, [P.A[i] for i in P.active(z)]).generators
        rows += [list(r) for r in rays] + [list(b) for b in lin] + [[-x for x in b] for b in lin]
    return PolyhedralCone(dim, rows).generators


def verify_semismooth_star(pieces, point, epsilons=(Fraction(1, 2), Fraction(1, 10), Fraction(1, 100)),
                           samples: int = 64, seed: int = 0, radius=1, levels: int = 8) -> SemismoothReport:
    """Check ``|<x*, z - z̄>| <= ε |z - z̄| |x*|`` for regular normals ``x*`` at sampled ``z``.

    For every ``ε`` the balls of radius ``radius * 2**-j`` are tried in turn;
    the verdict is "consistent" when each ``ε`` has a ball on which all
    samples pass. Polyhedral unions always pass for small balls.
    """
    if isinstance(pieces, SolutionGraph):
        pieces = pieces.pieces
    pieces = list(pieces)
    point = qvec(point)
    if not any(P.contains(point) for P in pieces):
        raise OracleError("point is not in the union")
    rng = np.random.Generator(np.random.PCG64(seed))
    radius = q(radius)
    dim = len(point)
    found = []
    for eps in epsilons:
        eps = q(eps)
        hit = None
        for j in range(levels):
            h = radius / 2**j
            if _ball_passes(pieces, point, eps, h, samples, rng, dim):
                hit = h
                break
        found.append(hit)
    verdict = "consistent" if all(h is not None for h in found) else "violated"
    return SemismoothReport(verdict, tuple(found), samples)


def _ball_passes(pieces, point, eps, h, samples, rng, dim) -> bool:
    bA, bb = _box(point, h / dim)
    pools = []
    for P in pieces:
        res = lp.linprog(rng.integers(-4, 5, size=dim).tolist(), list(P.A) + bA, list(P.b) + bb)
        if res.ok:
            pools.append((P, res.x))
    for _ in range(samples):
        P, v = pools[int(rng.integers(len(pools)))]
        res = lp.linprog(rng.integers(-4, 5, size=dim).tolist(), list(P.A) + bA, list(P.b) + bb)
        t = Fraction(int(rng.integers(1, 9)), 8)
        z = [a + t * (b - a) for a, b in zip(v, res.x)]
        lin, rays = _regular_normal_generators(pieces, z)
        if not rays and not lin:
            continue
        xs = [ZERO] * dim
        for r in rays:
            t = int(rng.integers(0, 4))
            xs = [a + t * b for a, b in zip(xs, r)]
        for b in lin:
            t = int(rng.integers(-3, 4))
            xs = [a + t * c for a, c in zip(xs, b)]
        d = vsub(z, point)
        lhs = dot(xs, d) ** 2
        if lhs > eps * eps * _sqnorm(d) * _sqnorm(xs):
            return False
    return True
