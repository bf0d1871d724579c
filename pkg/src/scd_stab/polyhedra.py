"""Exact polyhedral geometry for cones and sets given by inequalities.

All predicates run in rational arithmetic. Floating point only appears when
a face's linear span is handed out as a :class:`~scd_stab.subspace.Subspace`.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import product
from typing import Iterable, Sequence

from . import lp
from .rational import (
    ONE,
    ZERO,
    dot,
    fmt_mat,
    fmt_vec,
    is_zero,
    nullspace,
    primitive,
    q,
    qmat,
    qvec,
    rank,
    to_float,
    vscale,
    vsub,
)
from .subspace import Subspace, span


class PolyhedronError(ValueError):
    pass


def _clean_rows(rows, dim: int) -> tuple[tuple[Fraction, ...], ...]:
    out = []
    for r in rows:
        r = tuple(q(x) for x in r)
        if len(r) != dim:
            raise PolyhedronError(f"row {list(r)} has length {len(r)}, expected {dim}")
        out.append(r)
    return tuple(out)


@dataclass(frozen=True)
class PolyhedralSet:
    """``{z in R^k : A z <= b}``; redundant rows are allowed."""

    dim: int
    A: tuple = ()
    b: tuple = ()

    def __post_init__(self):
        A = _clean_rows(self.A, self.dim)
        b = tuple(q(x) for x in self.b)
        if len(A) != len(b):
            raise PolyhedronError("A and b have different numbers of rows")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @classmethod
    def whole(cls, dim: int) -> "PolyhedralSet":
        return cls(dim)

    def active(self, d: Sequence) -> list[int]:
        return [i for i, (a, bi) in enumerate(zip(self.A, self.b)) if dot(a, d) == bi]

    def contains(self, d: Sequence) -> bool:
        d = qvec(d)
        return len(d) == self.dim and all(dot(a, d) <= bi for a, bi in zip(self.A, self.b))

    def is_empty(self) -> bool:
        if not self.A:
            return False
        return lp.feasible_point(self.A, self.b, n=self.dim) is None

    def to_json(self) -> dict:
        return {"A": fmt_mat(self.A), "b": fmt_vec(self.b)}

    @classmethod
    def from_json(cls, data: dict, dim: int | None = None) -> "PolyhedralSet":
        A = qmat(data.get("A", []))
        b = qvec(data.get("b", []))
        if dim is None:
            if not A:
                raise PolyhedronError("cannot infer dimension of an unconstrained set")
            dim = len(A[0])
        return cls(dim, A, b)


@dataclass(frozen=True)
class PolyhedralCone:
    """``{z in R^k : A_ineq z <= 0, A_eq z = 0}``."""

    dim: int
    A_ineq: tuple = ()
    A_eq: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "A_ineq", _clean_rows(self.A_ineq, self.dim))
        object.__setattr__(self, "A_eq", _clean_rows(self.A_eq, self.dim))

    @classmethod
    def whole(cls, dim: int) -> "PolyhedralCone":
        return cls(dim)

    @classmethod
    def origin(cls, dim: int) -> "PolyhedralCone":
        return cls(dim, (), [[ONE if i == j else ZERO for j in range(dim)] for i in range(dim)])

    def contains(self, z: Sequence) -> bool:
        z = qvec(z)
        return all(dot(a, z) <= 0 for a in self.A_ineq) and all(dot(a, z) == 0 for a in self.A_eq)

    @cached_property
    def generators(self) -> tuple[list, list]:
        """(lineality basis, extreme rays) by double description."""
        return double_description(self)

    def to_json(self) -> dict:
        return {"A_ineq": fmt_mat(self.A_ineq), "A_eq": fmt_mat(self.A_eq), "dim": self.dim}

    @classmethod
    def from_json(cls, data: dict) -> "PolyhedralCone":
        A_ineq = qmat(data.get("A_ineq", []))
        A_eq = qmat(data.get("A_eq", []))
        dim = data.get("dim")
        if dim is None:
            rows = A_ineq or A_eq
            if not rows:
                raise PolyhedronError("cone needs 'dim' when it has no rows")
            dim = len(rows[0])
        return cls(int(dim), A_ineq, A_eq)


# ---------------------------------------------------------------------------
# double description


def double_description(C: PolyhedralCone) -> tuple[list, list]:
    """Minimal generators of ``C``: a lineality basis and the extreme rays.

    Constraints are added one at a time to the representation of R^k. Rays
    are combined only when adjacent (combinatorial test on tight sets).
    """
    k = C.dim
    lin = [[ONE if i == j else ZERO for i in range(k)] for j in range(k)]
    rays: list[tuple[list, frozenset]] = []
    cons = [(a, False) for a in C.A_ineq] + [(a, True) for a in C.A_eq]
    for idx, (a, is_eq) in enumerate(cons):
        if is_zero(a):
            rays = [(r, z | {idx}) for r, z in rays]
            continue
        vals = [dot(a, l) for l in lin]
        piv = next((i for i, v in enumerate(vals) if v != 0), None)
        if piv is not None:
            l0, v0 = lin[piv], vals[piv]
            new_lin = []
            for i, (l, v) in enumerate(zip(lin, vals)):
                if i == piv:
                    continue
                new_lin.append(vsub(l, vscale(v / v0, l0)) if v else l)
            new_rays = []
            for r, z in rays:
                ar = dot(a, r)
                r2 = vsub(r, vscale(ar / v0, l0)) if ar else r
                new_rays.append((r2, z | {idx}))
            if not is_eq:
                l0 = l0 if v0 < 0 else vscale(-ONE, l0)
                tight = frozenset(range(idx))
                new_rays.append((primitive(l0), tight))
            lin, rays = new_lin, new_rays
            continue
        pos, neg, zer = [], [], []
        for r, z in rays:
            s = dot(a, r)
            (pos if s > 0 else neg if s < 0 else zer).append((r, z, s))
        kept = [(r, z | {idx}) for r, z, _ in zer]
        if not is_eq:
            kept += [(r, z) for r, z, _ in neg]
        current = [(r, z) for r, z, _ in pos + neg + zer]
        for rp, zp, sp in pos:
            for rn, zn, sn in neg:
                common = zp & zn
                adjacent = True
                for r, z in current:
                    if r is rp or r is rn:
                        continue
                    if common <= z:
                        adjacent = False
                        break
                if not adjacent:
                    continue
                new = [sp * x - sn * y for x, y in zip(rn, rp)]
                kept.append((primitive(new), common | {idx}))
        rays = kept
    # dedupe parallel rays
    seen = set()
    out = []
    for r, _ in rays:
        key = tuple(primitive(r))
        if key not in seen and any(key):
            seen.add(key)
            out.append(list(key))
    return [primitive(l) for l in lin], out


def polar(C: PolyhedralCone) -> PolyhedralCone:
    """Negative polar ``{y : <y, z> <= 0 for all z in C}``."""
    lin, rays = C.generators
    return PolyhedralCone(C.dim, rays, lin)


def cone_from_generators(dim: int, rays: Iterable, lineality: Iterable = ()) -> PolyhedralCone:
    """H-representation of ``cone(rays) + span(lineality)``."""
    return polar(PolyhedralCone(dim, list(rays), list(lineality)))


def cone_subset(C1: PolyhedralCone, C2: PolyhedralCone) -> bool:
    """Exact test of ``C1 ⊆ C2`` by one LP per constraint of ``C2``."""
    rows = [a for a in C2.A_ineq] + [a for a in C2.A_eq] + [[-x for x in a] for a in C2.A_eq]
    for a in rows:
        res = lp.linprog(a, list(C1.A_ineq) + [a], [0] * len(C1.A_ineq) + [1], C1.A_eq, [0] * len(C1.A_eq))
        if res.value > 0:
            return False
    return True


def cone_equal(C1: PolyhedralCone, C2: PolyhedralCone) -> bool:
    return cone_subset(C1, C2) and cone_subset(C2, C1)


@dataclass(frozen=True)
class Triviality:
    trivial: bool
    witness: list | None = None

    def __bool__(self) -> bool:
        return self.trivial


def cone_is_trivial(C: PolyhedralCone) -> Triviality:
    """Decide ``C == {0}`` exactly; a nonzero witness is returned otherwise.

    Lineality is found by elimination; for a pointed cone every nonzero
    element makes ``(sum of inequality rows) . z`` strictly negative, so one
    LP settles it.
    """
    k = C.dim
    if k == 0:
        return Triviality(True)
    ns = nullspace([list(a) for a in C.A_ineq] + [list(a) for a in C.A_eq], k)
    if ns:
        return Triviality(False, primitive(ns[0]))
    if not C.A_ineq:
        return Triviality(True)
    s = [sum((a[j] for a in C.A_ineq), ZERO) for j in range(k)]
    res = lp.linprog([-x for x in s], list(C.A_ineq) + [[-x for x in s]], [0] * len(C.A_ineq) + [1], C.A_eq, [0] * len(C.A_eq))
    if res.value > 0:
        w = primitive(res.x)
        assert C.contains(w) and not is_zero(w)
        return Triviality(False, w)
    return Triviality(True)


# ---------------------------------------------------------------------------
# cones attached to a polyhedral set


def _require_member(D: PolyhedralSet, d) -> list:
    d = qvec(d)
    if len(d) != D.dim or not D.contains(d):
        raise PolyhedronError(f"point {fmt_vec(d)} is not in D")
    return d


def tangent_cone(D: PolyhedralSet, d) -> PolyhedralCone:
    d = _require_member(D, d)
    return PolyhedralCone(D.dim, [D.A[i] for i in D.active(d)])


def normal_cone(D: PolyhedralSet, d) -> PolyhedralCone:
    return polar(tangent_cone(D, d))


def in_normal_graph(D: PolyhedralSet, d, dstar) -> bool:
    d, dstar = qvec(d), qvec(dstar)
    if len(d) != D.dim or len(dstar) != D.dim or not D.contains(d):
        return False
    return normal_cone(D, d).contains(dstar)


def critical_cone(D: PolyhedralSet, d, dstar) -> PolyhedralCone:
    """``T_D(d) ∩ [dstar]^⊥``; requires ``dstar ∈ N_D(d)``."""
    d, dstar = qvec(d), qvec(dstar)
    if not in_normal_graph(D, d, dstar):
        raise PolyhedronError("pair (d, d*) is not in the graph of the normal cone map")
    T = tangent_cone(D, d)
    eq = [dstar] if not is_zero(dstar) else []
    return PolyhedralCone(D.dim, T.A_ineq, eq)


# ---------------------------------------------------------------------------
# faces


@dataclass(frozen=True, eq=False)
class Face:
    """Face ``{z in C : A_i z = 0 for i in active}`` with a closed active set."""

    parent: PolyhedralCone
    active: frozenset
    interior: tuple = field(default=(), repr=False)

    @property
    def key(self) -> tuple:
        return tuple(sorted(self.active))

    def __eq__(self, other):
        return isinstance(other, Face) and self.parent == other.parent and self.active == other.active

    def __hash__(self):
        return hash((self.parent, self.active))

    @cached_property
    def equations(self) -> list:
        return [list(self.parent.A_ineq[i]) for i in sorted(self.active)] + [list(a) for a in self.parent.A_eq]

    @cached_property
    def span_basis(self) -> list:
        """Exact basis of ``F - F`` (the nullspace of the active equations)."""
        return nullspace(self.equations, self.parent.dim)

    @property
    def dim(self) -> int:
        return len(self.span_basis)

    @cached_property
    def perp_basis(self) -> list:
        """Exact basis of ``(F - F)^⊥``."""
        eq = self.equations
        if not eq:
            return []
        from .rational import row_basis

        return row_basis(eq, self.parent.dim)

    @property
    def cone(self) -> PolyhedralCone:
        C = self.parent
        rest = [C.A_ineq[i] for i in range(len(C.A_ineq)) if i not in self.active]
        return PolyhedralCone(C.dim, rest, self.equations)

    def contains(self, z) -> bool:
        return self.cone.contains(z)

    def is_subface_of(self, other: "Face") -> bool:
        return other.active <= self.active

    def lineality(self) -> Subspace:
        return lineality(self)

    def describe(self) -> dict:
        return {"active": list(self.key), "dim": self.dim, "span": fmt_mat(self.span_basis)}


def closure(C: PolyhedralCone, active: Iterable[int]) -> tuple[frozenset, list]:
    """Implied-equality closure of an active set, plus a relative interior point.

    One LP: maximize the total slack ``sum s_j`` with ``A_j z + s_j <= 0`` and
    ``0 <= s_j <= 1`` over the free rows. Rows whose slack cannot reach 1 are
    forced to equality on the face.
    """
    k = C.dim
    active = set(active)
    free = [j for j in range(len(C.A_ineq)) if j not in active]
    eqs = [list(C.A_ineq[i]) for i in sorted(active)] + [list(a) for a in C.A_eq]
    if not free:
        return frozenset(active), [ZERO] * k
    nf = len(free)
    A_ub, b_ub = [], []
    for t, j in enumerate(free):
        row = list(C.A_ineq[j]) + [ONE if s == t else ZERO for s in range(nf)]
        A_ub.append(row)
        b_ub.append(ZERO)
        unit = [ZERO] * (k + nf)
        unit[k + t] = ONE
        A_ub.append(unit)
        b_ub.append(ONE)
        A_ub.append([-x for x in unit])
        b_ub.append(ZERO)
    A_eq = [e + [ZERO] * nf for e in eqs]
    c = [ZERO] * k + [ONE] * nf
    res = lp.linprog(c, A_ub, b_ub, A_eq, [ZERO] * len(A_eq))
    x = res.x
    closed = set(active)
    for t, j in enumerate(free):
        if x[k + t] < 1:
            closed.add(j)
    return frozenset(closed), x[:k]


def enumerate_faces(C: PolyhedralCone) -> list[Face]:
    """All faces of ``C``, sorted by dimension then active set.

    Breadth-first search over closed active sets: every face is reached by
    adding one inequality at a time to the active set of a larger face.
    """
    top, pt = closure(C, ())
    faces = {top: Face(C, top, tuple(pt))}
    queue = deque([top])
    while queue:
        act = queue.popleft()
        for j in range(len(C.A_ineq)):
            if j in act:
                continue
            new, pt = closure(C, act | {j})
            if new not in faces:
                faces[new] = Face(C, new, tuple(pt))
                queue.append(new)
    return sorted(faces.values(), key=lambda F: (F.dim, F.key))


def minimal_face(C: PolyhedralCone) -> Face:
    return min(enumerate_faces(C), key=lambda F: F.dim)


def lineality(F: Face) -> Subspace:
    k = F.parent.dim
    return span([to_float(v) for v in F.span_basis], (k, 0))


def superface_cone(F1: Face, F2: Face) -> PolyhedralCone:
    """H-representation of ``F1 - F2`` for faces ``F2 ⊆ F1`` of one cone.

    This is the tangent cone of ``F1`` at a relative interior point of
    ``F2``: rows active on ``F1`` stay equalities, rows active on ``F2`` only
    stay inequalities, all others drop out.
    """
    if not F2.is_subface_of(F1):
        raise PolyhedronError("F2 must be a face of F1")
    C = F1.parent
    ineq = [C.A_ineq[i] for i in sorted(F2.active - F1.active)]
    return PolyhedralCone(C.dim, ineq, F1.equations)


def sc_derivative_ND(D: PolyhedralSet, d, dstar) -> list[Subspace]:
    """``(F-F) × (F-F)^⊥`` in R^(k+k) for every face F of the critical cone."""
    out = []
    for F in enumerate_faces(critical_cone(D, d, dstar)):
        out.append(face_subspace(F))
    return out


def face_subspace(F: Face) -> Subspace:
    k = F.parent.dim
    z = [ZERO] * k
    vecs = [to_float(list(v) + z) for v in F.span_basis]
    vecs += [to_float(z + list(v)) for v in F.perp_basis]
    return span(vecs, (k, k))


def outer_tangent_pieces_ND(D: PolyhedralSet, d, dstar) -> list[tuple[Face, Face]]:
    """Nested face pairs ``F2 ⊆ F1`` of the critical cone (pieces of T♯)."""
    return face_pairs(critical_cone(D, d, dstar))


def face_pairs(C: PolyhedralCone) -> list[tuple[Face, Face]]:
    faces = enumerate_faces(C)
    return [(F1, F2) for F1 in faces for F2 in faces if F2.is_subface_of(F1)]


# ---------------------------------------------------------------------------
# faces of a polyhedral set (through homogenization)


@dataclass(frozen=True)
class SetFace:
    """Nonempty face of a polyhedral set: its closed active row set."""

    active: frozenset
    point: tuple  # a relative interior point


def set_faces(D: PolyhedralSet) -> list[SetFace]:
    """Nonempty faces of ``D`` from the faces of its homogenization.

    ``{(z, t) : A z - b t <= 0, -t <= 0}``; faces not contained in
    ``t = 0`` correspond one-to-one to nonempty faces of ``D``.
    """
    k = D.dim
    rows = [list(a) + [-bi] for a, bi in zip(D.A, D.b)]
    rows.append([ZERO] * k + [-ONE])
    H = PolyhedralCone(k + 1, rows)
    t_row = len(rows) - 1
    out = []
    for F in enumerate_faces(H):
        if t_row in F.active:
            continue
        z, t = F.interior[:k], F.interior[k]
        out.append(SetFace(frozenset(F.active), tuple(x / t for x in z)))
    return sorted(out, key=lambda s: (len(s.active), sorted(s.active)))


def brute_force_faces(C: PolyhedralCone) -> set[frozenset]:
    """Closed active sets of all faces by enumerating every row subset.

    Independent of :func:`enumerate_faces`: the closure of a subset is read
    off the generators (rays vanishing on it) instead of an LP.
    """
    lin, rays = C.generators
    p = len(C.A_ineq)
    out = set()
    for mask in product((False, True), repeat=p):
        S = [i for i in range(p) if mask[i]]
        face_rays = [r for r in rays if all(dot(C.A_ineq[i], r) == 0 for i in S)]
        closed = frozenset(
            i for i in range(p) if all(dot(C.A_ineq[i], r) == 0 for r in face_rays)
        )
        out.add(closed)
    return out


def in_span_exact(v, basis) -> bool:
    from .rational import in_span

    return in_span(qvec(v), [list(b) for b in basis])


def project_rank(rows: list, dim: int) -> int:
    return rank(rows) if rows else 0
