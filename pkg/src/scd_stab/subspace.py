"""Linear subspaces of R^(n+m) with a declared (n, m) split.

A :class:`Subspace` stores an orthonormal basis (rows of ``basis``). Elements
of the Grassmannian Z_nm are the subspaces of dimension n; other dimensions
are allowed because intersections and complements produce them.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

ORTH_TOL = 1e-10
RANK_TOL = 1e-10
EQUAL_TOL = 1e-8  # configurable via the ``tol`` arguments


class SubspaceError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Subspace:
    split: tuple[int, int]
    basis: np.ndarray = field(repr=False)

    def __post_init__(self):
        n, m = self.split
        if n < 0 or m < 0:
            raise SubspaceError("split entries must be nonnegative")
        b = np.asarray(self.basis, dtype=float).reshape(-1, n + m)
        b.setflags(write=False)
        object.__setattr__(self, "split", (int(n), int(m)))
        object.__setattr__(self, "basis", b)
        if b.shape[0]:
            gram = b @ b.T
            if not np.allclose(gram, np.eye(b.shape[0]), atol=ORTH_TOL * 100):
                raise SubspaceError("basis is not orthonormal")

    @property
    def ambient(self) -> int:
        return sum(self.split)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @classmethod
    def zero(cls, split: tuple[int, int]) -> "Subspace":
        return cls(tuple(split), np.zeros((0, sum(split))))

    @classmethod
    def full(cls, split: tuple[int, int]) -> "Subspace":
        return cls(tuple(split), np.eye(sum(split)))

    def contains(self, v, tol: float = EQUAL_TOL) -> bool:
        v = np.asarray(v, dtype=float)
        r = v - self.basis.T @ (self.basis @ v)
        return float(np.linalg.norm(r)) <= tol * max(1.0, float(np.linalg.norm(v)))

    def equals(self, other: "Subspace", tol: float = EQUAL_TOL) -> bool:
        return self.dim == other.dim and distance(self, other) <= tol

    def to_json(self) -> dict:
        return {
            "ambient": self.ambient,
            "split": list(self.split),
            "basis": [[float(x) for x in row] for row in self.basis],
        }

    @classmethod
    def from_json(cls, data: dict) -> "Subspace":
        from .rational import q

        split = tuple(int(s) for s in data["split"])
        if "ambient" in data and int(data["ambient"]) != sum(split):
            raise SubspaceError("ambient dimension does not match split")
        rows = [[float(q(x)) for x in row] for row in data.get("basis", [])]
        if not rows:
            return cls.zero(split)
        return from_spanning_matrix(rows, split)


def _orthonormalize(vectors: np.ndarray) -> np.ndarray:
    """Gram-Schmidt with column pivoting, each projection applied twice.

    ``vectors`` holds candidate vectors as rows. Rank is decided relative to
    the largest input norm.
    """
    vecs = [np.array(v, dtype=float) for v in vectors]
    if not vecs:
        return np.zeros((0, 0))
    dim = vecs[0].shape[0]
    scale = max(float(np.linalg.norm(v)) for v in vecs)
    if scale == 0.0:
        return np.zeros((0, dim))
    out: list[np.ndarray] = []
    remaining = vecs
    while remaining and len(out) < dim:
        norms = [float(np.linalg.norm(v)) for v in remaining]
        i = int(np.argmax(norms))
        if norms[i] <= RANK_TOL * scale:
            break
        v = remaining.pop(i)
        for _ in range(2):
            for u in out:
                v = v - (u @ v) * u
        nv = float(np.linalg.norm(v))
        if nv <= RANK_TOL * scale:
            continue
        u = v / nv
        out.append(u)
        remaining = [w - (u @ w) * u for w in remaining]
    return np.array(out).reshape(len(out), dim)


def from_spanning_matrix(columns: Sequence[Sequence[float]], split: tuple[int, int]) -> Subspace:
    """Orthonormal basis of the span of ``columns`` (a list of vectors)."""
    cols = np.asarray([[float(x) for x in c] for c in columns], dtype=float)
    n, m = split
    if cols.size == 0:
        raise SubspaceError("zero subspace requires explicit dimension 0")
    cols = cols.reshape(-1, n + m) if cols.ndim == 1 else cols
    if cols.shape[1] != n + m:
        raise SubspaceError(f"vectors have length {cols.shape[1]}, split needs {n + m}")
    basis = _orthonormalize(cols)
    if basis.shape[0] == 0:
        raise SubspaceError("zero subspace requires explicit dimension 0")
    return Subspace((n, m), basis)


def span(columns, split: tuple[int, int]) -> Subspace:
    """Like :func:`from_spanning_matrix` but an empty or zero span gives {0}."""
    cols = [c for c in columns]
    if not cols or not np.any(np.asarray(cols, dtype=float)):
        return Subspace.zero(split)
    return from_spanning_matrix(cols, split)


def projection(L: Subspace) -> np.ndarray:
    return L.basis.T @ L.basis


def distance(L1: Subspace, L2: Subspace) -> float:
    """Spectral norm of the difference of the orthogonal projections."""
    if L1.ambient != L2.ambient:
        raise SubspaceError(f"ambient dimension mismatch: {L1.ambient} vs {L2.ambient}")
    diff = projection(L1) - projection(L2)
    if diff.size == 0:
        return 0.0
    ev = np.linalg.eigvalsh((diff + diff.T) / 2)
    return float(np.max(np.abs(ev)))


def complement(L: Subspace) -> Subspace:
    N = L.ambient
    if L.dim == 0:
        return Subspace.full(L.split)
    if L.dim == N:
        return Subspace.zero(L.split)
    # trailing right singular vectors of an orthonormal basis span its complement
    _, _, vt = np.linalg.svd(L.basis, full_matrices=True)
    return Subspace(L.split, _orthonormalize(vt[L.dim:]))


def rotation(n: int, m: int) -> np.ndarray:
    """The block matrix S_nm = [[0, -I_m], [I_n, 0]] mapping (u, v) to (-v, u)."""
    S = np.zeros((n + m, n + m))
    S[:m, n:] = -np.eye(m)
    S[m:, :n] = np.eye(n)
    return S


def adjoint(L: Subspace) -> Subspace:
    n, m = L.split
    if L.dim != n:
        raise SubspaceError(f"adjoint needs dim == {n}, got {L.dim}")
    perp = complement(L)
    S = rotation(n, m)
    return Subspace((m, n), perp.basis @ S.T)


def linear_image(A, L: Subspace, split: tuple[int, int] | None = None) -> Subspace:
    """Image ``A L`` for a full-column-rank ``A`` with ``L.ambient`` columns."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[1] != L.ambient:
        raise SubspaceError("matrix columns must match the ambient dimension")
    if np.linalg.matrix_rank(A) < A.shape[1]:
        raise SubspaceError("linear_image needs a full-column-rank matrix")
    if split is None:
        if A.shape[0] != L.ambient:
            raise SubspaceError("non-square matrix needs an explicit target split")
        split = L.split
    if L.dim == 0:
        return Subspace.zero(split)
    return from_spanning_matrix(L.basis @ A.T, split)


def intersect_coordinate(L: Subspace, mask: Sequence[bool]) -> Subspace:
    """``L`` intersected with ``{z : z_i = 0 for every i with mask[i]}``."""
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (L.ambient,):
        raise SubspaceError("mask length must equal the ambient dimension")
    if L.dim == 0 or not mask.any():
        return L
    rows = L.basis[:, mask].T  # equations on the coefficients
    _, s, vt = np.linalg.svd(rows, full_matrices=True)
    r = int(np.sum(s > RANK_TOL * max(1.0, s[0] if s.size else 0.0)))
    null = vt[r:]
    if null.shape[0] == 0:
        return Subspace.zero(L.split)
    vecs = null @ L.basis
    vecs[:, mask] = 0.0
    return Subspace(L.split, _orthonormalize(vecs))
