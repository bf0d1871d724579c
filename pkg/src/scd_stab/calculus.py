"""Subspace-containing derivatives of composite mappings.

Members are carried as exact rational spanning sets so the stability checks
stay exact; ``Member.subspace`` gives the orthonormal floating view.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

from .polyhedra import PolyhedralSet, enumerate_faces
from .problem import GEProblem
from .rational import (
    ONE,
    ZERO,
    column_basis,
    fmt_mat,
    identity,
    inverse,
    matmul,
    matvec,
    nullspace,
    qmat,
    qvec,
    rank,
    to_float,
    transpose,
)
from .subspace import Subspace, span

PRIMAL = "primal"
DUAL = "dual"


class CalculusError(ValueError):
    pass


def rotation_matrix(n: int, m: int) -> list:
    """Exact S_nm: ``(u, v) -> (-v, u)`` for ``u ∈ R^n``, ``v ∈ R^m``."""
    S = [[ZERO] * (n + m) for _ in range(n + m)]
    for i in range(m):
        S[i][n + i] = -ONE
    for j in range(n):
        S[m + j][j] = ONE
    return S


@dataclass(frozen=True)
class Member:
    """A subspace given by an exact spanning set, with its (n, m) split."""

    split: tuple
    basis: tuple  # linearly independent rational vectors
    tag: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        N = sum(self.split)
        vecs = [qvec(v) for v in self.basis]
        if any(len(v) != N for v in vecs):
            raise CalculusError("basis vector length does not match split")
        object.__setattr__(self, "split", tuple(self.split))
        object.__setattr__(self, "basis", tuple(tuple(v) for v in column_basis(vecs, N)))

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def ambient(self) -> int:
        return sum(self.split)

    @cached_property
    def subspace(self) -> Subspace:
        return span([to_float(v) for v in self.basis], self.split)

    def contains(self, z) -> bool:
        from .rational import in_span

        return in_span(qvec(z), [list(v) for v in self.basis])

    def image(self, A, split) -> "Member":
        return Member(split, [matvec(A, list(v)) for v in self.basis], self.tag)

    def adjoint(self) -> "Member":
        """``S_nm L^⊥`` exactly; requires ``dim == n``."""
        n, m = self.split
        if self.dim != n:
            raise CalculusError(f"adjoint needs dim == {n}, got {self.dim}")
        perp = nullspace([list(v) for v in self.basis], n + m) if self.basis else identity(n + m)
        S = rotation_matrix(n, m)
        return Member((m, n), [matvec(S, v) for v in perp], self.tag)

    def to_json(self) -> dict:
        return {"split": list(self.split), "basis": fmt_mat(self.basis), "tag": self.tag}


@dataclass(frozen=True)
class SCDerivativeCollection:
    kind: str
    members: tuple
    param_dim: int  # l: length of the parameter block x
    augmented: bool = False

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)

    def adjoints(self) -> "SCDerivativeCollection":
        kind = DUAL if self.kind == PRIMAL else PRIMAL
        return SCDerivativeCollection(kind, tuple(M.adjoint() for M in self.members), self.param_dim, self.augmented)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "param_dim": self.param_dim,
            "augmented": self.augmented,
            "members": [M.to_json() for M in self.members],
        }


# ---------------------------------------------------------------------------


def transform_by_jacobian(jac, M: Member) -> Member:
    """Pull a member back through an invertible Jacobian: ``jac^{-1} M``."""
    jac = qmat(jac)
    try:
        inv = inverse(jac)
    except ValueError:
        raise CalculusError("Jacobian is singular") from None
    if len(jac) != M.ambient:
        raise CalculusError("Jacobian size does not match the member")
    return M.image(inv, M.split)


def transform_dual_by_jacobian(jac, Mstar: Member, split: tuple) -> Member:
    """Dual rule ``S_nm jac^T S_lm^T M*`` where ``split = (n, m)`` of the result's primal."""
    jac = qmat(jac)
    n, m = split
    mM, lM = Mstar.split  # M* lives in R^m x R^l
    if len(jac) != lM + mM or len(jac[0]) != n + m or mM != m:
        raise CalculusError("dimension mismatch in the dual transformation")
    if rank(jac) < len(jac):
        raise CalculusError("Jacobian lacks full row rank")
    S_nm = rotation_matrix(n, m)
    S_lm_T = transpose(rotation_matrix(lM, m))
    T = matmul(matmul(S_nm, transpose(jac)), S_lm_T)
    return Mstar.image(T, (m, n))


def _face_tag(F) -> dict:
    return {"face": list(F.key), "face_dim": F.dim}


def sc_derivative_Q(p: GEProblem) -> SCDerivativeCollection:
    """Primal members of ``Q(x,y) = N_D(g(x,y))``, one per critical face.

    A rank-deficient ``∇g`` is handled by passing to the problem with the
    extra parameter ``p`` in ``g(x,y) - p``; the collection is flagged and
    lives in the larger space (see :func:`restrict`).
    """
    augmented = not p.full_row_rank
    if augmented:
        p = p.augmented()
    n, k = p.l + p.k, p.k
    Jg = [list(r) for r in p.Jg]
    members = []
    for F in enumerate_faces(p.critical_cone):
        eq = F.equations
        if eq:
            ws = nullspace(matmul(eq, Jg), n)
        else:
            ws = identity(n)
        vecs = [list(w) + [ZERO] * k for w in ws]
        vecs += [[ZERO] * n + list(e) for e in F.perp_basis]
        members.append(Member((n, k), vecs, _face_tag(F)))
    return SCDerivativeCollection(PRIMAL, tuple(members), p.l, augmented)


def restrict(coll: SCDerivativeCollection, l: int, k: int) -> list[Member]:
    """Undo the parameter augmentation: intersect with ``p = 0`` and drop ``p``.

    The results need not have the Z_nm dimension; they are plain subspaces.
    """
    if not coll.augmented:
        return list(coll.members)
    out = []
    for M in coll.members:
        N = M.ambient
        drop = set(range(l, l + k)) if coll.kind == PRIMAL else set(range(k + l, k + l + k))
        rows = [[v[j] for v in M.basis] for j in sorted(drop)]
        coef = nullspace(rows, M.dim) if rows else identity(M.dim)
        vecs = []
        for c in coef:
            z = [sum((ci * v[j] for ci, v in zip(c, M.basis)), ZERO) for j in range(N)]
            vecs.append([z[j] for j in range(N) if j not in drop])
        n, m = M.split
        split = (n - k, m) if coll.kind == PRIMAL else (n, m - k)
        out.append(Member(split, vecs, M.tag))
    return out


def _phi_jacobian(p: GEProblem) -> list:
    """Jacobian of ``((x,y), z) -> ((x,y), z - f(x,y))``."""
    n, k = p.l + p.k, p.k
    top = [list(r) + [ZERO] * k for r in identity(n)]
    bottom = [[-v for v in p.Jf[i]] + identity(k)[i] for i in range(k)]
    return top + bottom


def sc_derivative_H(p: GEProblem, Q: SCDerivativeCollection | None = None):
    """Primal and dual members of ``H = f + Q``.

    Primal members are the pull-back ``∇Φ^{-1} M``; dual members come from the
    dual transformation rule applied to ``M*`` (not from adjoining the primal
    results), so the two routes can be compared.
    """
    if Q is None:
        Q = sc_derivative_Q(p)
    if Q.augmented:
        p = p.augmented()
    jac = _phi_jacobian(p)
    n, k = p.l + p.k, p.k
    primal = tuple(transform_by_jacobian(jac, M) for M in Q.members)
    dual = tuple(transform_dual_by_jacobian(jac, M.adjoint(), (n, k)) for M in Q.members)
    return (
        SCDerivativeCollection(PRIMAL, primal, p.l, Q.augmented),
        SCDerivativeCollection(DUAL, dual, p.l, Q.augmented),
    )


def extend_to_F(p: GEProblem, collections) -> tuple[SCDerivativeCollection, SCDerivativeCollection]:
    """Members for ``F(x,y) = (x, H(x,y))`` from those of ``H``."""
    primal, dual = collections
    l = primal.param_dim
    n = primal.members[0].split[0] if primal.members else l + p.k
    k = n - l
    out_p, out_d = [], []
    for L in primal.members:
        vecs = []
        for v in L.basis:
            u, w = list(v[:l]), list(v[n:])
            vecs.append(list(v[:n]) + u + w)
        out_p.append(Member((n, n), vecs, L.tag))
    for Ls in dual.members:
        vecs = []
        for v in Ls.basis:  # (w*, u*, v*) with w* in R^k, u* in R^l, v* in R^k
            w, uv = list(v[:k]), list(v[k:])
            vecs.append([ZERO] * l + w + uv)
        for i in range(l):
            e = [ZERO] * l
            e[i] = ONE
            vecs.append(e + [ZERO] * k + e + [ZERO] * k)
        out_d.append(Member((n, n), vecs, Ls.tag))
    return (
        SCDerivativeCollection(PRIMAL, tuple(out_p), l, primal.augmented),
        SCDerivativeCollection(DUAL, tuple(out_d), l, dual.augmented),
    )


# ---------------------------------------------------------------------------
# piecewise affine single-valued maps


@dataclass(frozen=True)
class AffinePiece:
    A: tuple  # m x n
    c: tuple  # m
    cell: PolyhedralSet

    def __post_init__(self):
        object.__setattr__(self, "A", tuple(tuple(r) for r in qmat(self.A)))
        object.__setattr__(self, "c", tuple(qvec(self.c)))

    def __call__(self, x) -> list:
        return [a + b for a, b in zip(matvec([list(r) for r in self.A], qvec(x)), self.c)]


@dataclass(frozen=True)
class BJacobian:
    matrices: tuple
    primal: tuple  # rge(I, A)
    dual: tuple  # rge(I, A^T)


def graph_member(A) -> Member:
    """``rge(I, A)`` for an ``m x n`` matrix, split (n, m)."""
    A = qmat(A)
    m, n = len(A), len(A[0])
    I = identity(n)
    return Member((n, m), [I[j] + [A[i][j] for i in range(m)] for j in range(n)])


def bjacobian_pwa(pieces: Sequence[AffinePiece], x) -> BJacobian:
    """B-Jacobian of a continuous piecewise affine map at ``x`` and its SC lift."""
    x = qvec(x)
    active = [P for P in pieces if P.cell.contains(x) and not P.cell.is_empty()]
    if not active:
        raise CalculusError("no cell contains the point")
    values = {tuple(P(x)) for P in active}
    if len(values) > 1:
        raise CalculusError("pieces disagree at the point (map is not continuous)")
    full = [P for P in active if _full_dimensional(P.cell)]
    mats = []
    for P in full or active:
        if P.A not in mats:
            mats.append(P.A)
    mats = tuple(mats)
    primal = tuple(graph_member(A) for A in mats)
    dual = tuple(graph_member(transpose([list(r) for r in A])) for A in mats)
    return BJacobian(mats, primal, dual)


def _full_dimensional(cell: PolyhedralSet) -> bool:
    """A cell has interior iff some point satisfies every row strictly."""
    from . import lp

    n = cell.dim
    rows = []
    for a, bi in zip(cell.A, cell.b):
        if any(a):
            rows.append((a, bi))
        elif bi < 0:
            return False  # 0 <= b fails: empty cell
    if not rows:
        return True
    # maximize t with A z + t <= b, t <= 1 over the nonvacuous rows
    A_ub = [list(a) + [ONE] for a, _ in rows] + [[ZERO] * n + [ONE]]
    b_ub = [bi for _, bi in rows] + [ONE]
    res = lp.linprog([ZERO] * n + [ONE], A_ub, b_ub)
    return res.ok and res.value > 0
