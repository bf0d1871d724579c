"""Exact stability conditions for ``0 ∈ f(x,y) + N_D(g(x,y))``.

Every implication is decided as triviality of a subspace intersection or of
a polyhedral cone in rational arithmetic. A failing verdict carries a
witness that has been re-verified independently before it is reported.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .calculus import (
    DUAL,
    PRIMAL,
    Member,
    SCDerivativeCollection,
    extend_to_F,
    sc_derivative_H,
    sc_derivative_Q,
)
from .polyhedra import (
    Face,
    PolyhedralCone,
    cone_is_trivial,
    enumerate_faces,
    face_pairs,
    polar,
    superface_cone,
)
from .problem import GEProblem
from .rational import (
    ZERO,
    dot,
    fmt_vec,
    is_zero,
    matmul,
    matvec,
    nullspace,
    primitive,
    transpose,
    vadd,
)

CONDITIONS = ("scd_regular", "primal_5_4", "dual_5_5", "face_EqCompl", "facepair_EqCompl1", "point_LR", "aubin_eq100")
CLI_NAMES = {
    "primal": "primal_5_4",
    "dual": "dual_5_5",
    "face": "face_EqCompl",
    "facepair": "facepair_EqCompl1",
    "point": "point_LR",
    "aubin": "aubin_eq100",
    "scd": "scd_regular",
}


class WitnessError(AssertionError):
    """A computed witness failed its independent re-check (a bug, not a verdict)."""


@dataclass(frozen=True)
class Verdict:
    condition: str
    holds: bool
    witness: dict | None = None
    provenance: dict | None = None

    def to_json(self) -> dict:
        out = {"condition": self.condition, "verdict": "holds" if self.holds else "fails"}
        out["witness"] = self.witness or {}
        out["provenance"] = self.provenance or {}
        return out


@dataclass
class StabilityReport:
    verdicts: dict = field(default_factory=dict)

    def add(self, v: Verdict) -> None:
        self.verdicts[v.condition] = v

    @property
    def all_hold(self) -> bool:
        return all(v.holds for v in self.verdicts.values())

    def __getitem__(self, name: str) -> Verdict:
        return self.verdicts[CLI_NAMES.get(name, name)]

    def to_json(self) -> list:
        return [self.verdicts[c].to_json() for c in CONDITIONS if c in self.verdicts]


def _fails(condition, witness, provenance) -> Verdict:
    w = {k: fmt_vec(v) for k, v in witness.items()}
    return Verdict(condition, False, w, provenance)


# ---------------------------------------------------------------------------
# subspace conditions


def coordinate_intersection(M: Member, zero_coords) -> list | None:
    """A nonzero exact vector of ``M ∩ {z_i = 0, i ∈ zero_coords}`` or None."""
    zero_coords = sorted(zero_coords)
    basis = [list(v) for v in M.basis]
    if not basis:
        return None
    rows = [[v[j] for v in basis] for j in zero_coords]
    coef = nullspace(rows, len(basis)) if rows else [[1 if i == 0 else 0 for i in range(len(basis))]]
    if not coef:
        return None
    c = coef[0]
    z = [sum((ci * v[j] for ci, v in zip(c, basis)), ZERO) for j in range(M.ambient)]
    return primitive(z)


def check_scd_regular(coll: SCDerivativeCollection) -> Verdict:
    """``(v*, 0) ∈ L*  ⇒  v* = 0`` for every member of a square dual collection."""
    if coll.kind != DUAL:
        raise ValueError("SCD regularity is stated for the dual (coderivative) collection")
    for M in coll.members:
        n, m = M.split
        if n != m:
            raise ValueError(f"SCD regularity needs a square split, got {M.split}")
        z = coordinate_intersection(M, range(n, 2 * n))
        if z is not None:
            if not M.contains(z) or is_zero(z[:n]):
                raise WitnessError("scd_regular witness failed re-check")
            return _fails("scd_regular", {"v*": z[:n]}, dict(M.tag))
    return Verdict("scd_regular", True)


def check_primal(coll: SCDerivativeCollection) -> Verdict:
    """``((0, v), 0) ∈ L  ⇒  v = 0`` for every primal member of ``S H``."""
    if coll.kind != PRIMAL:
        raise ValueError("expected a primal collection")
    l = coll.param_dim
    for M in coll.members:
        n, k = M.split
        zero = list(range(l)) + list(range(n, n + k))
        z = coordinate_intersection(M, zero)
        if z is not None:
            v = z[l:n]
            probe = [ZERO] * l + v + [ZERO] * k
            if is_zero(v) or not M.contains(probe):
                raise WitnessError("primal witness failed re-check")
            return _fails("primal_5_4", {"v": v}, dict(M.tag))
    return Verdict("primal_5_4", True)


def check_dual(coll: SCDerivativeCollection) -> Verdict:
    """``(w*, (u*, 0)) ∈ L*  ⇒  w* = 0, u* = 0`` for every dual member."""
    if coll.kind != DUAL:
        raise ValueError("expected a dual collection")
    l = coll.param_dim
    for M in coll.members:
        k, n = M.split
        z = coordinate_intersection(M, range(k + l, k + n))
        if z is not None:
            w, u = z[:k], z[k : k + l]
            if is_zero(w) and is_zero(u) or not M.contains(w + u + [ZERO] * (n - l)):
                raise WitnessError("dual witness failed re-check")
            return _fails("dual_5_5", {"w*": w, "u*": u}, dict(M.tag))
    return Verdict("dual_5_5", True)


# ---------------------------------------------------------------------------
# face conditions


def face_kernel(p: GEProblem, F: Face) -> list | None:
    """Nonzero ``v`` with ``∇_y g v ∈ F-F`` and ``-∇_y f v ∈ (F-F)^⊥``, or None."""
    rows = []
    if F.equations:
        rows += matmul(F.equations, p.Gy)
    if F.span_basis:
        rows += matmul([list(b) for b in F.span_basis], p.Fy)
    ns = nullspace(rows, p.k) if rows else nullspace([], p.k)
    return primitive(ns[0]) if ns else None


def verify_face_witness(p: GEProblem, F: Face, v) -> bool:
    """Exact re-check of a face-condition witness."""
    if is_zero(v):
        return False
    gv = matvec(p.Gy, v)
    fv = [-x for x in matvec(p.Fy, v)]
    in_span = all(dot(e, gv) == 0 for e in F.equations)
    perp = all(dot(b, fv) == 0 for b in F.span_basis)
    return in_span and perp


def check_face(p: GEProblem) -> Verdict:
    K = p.critical_cone
    for F in enumerate_faces(K):
        v = face_kernel(p, F)
        if v is not None:
            if not verify_face_witness(p, F, v):
                raise WitnessError("face witness failed re-check")
            return _fails("face_EqCompl", {"v": v}, {"face": list(F.key)})
    return Verdict("face_EqCompl", True)


def _rows_on(rows, M) -> list:
    """Constraint rows ``r`` turned into rows ``r M`` on the variable of ``M``."""
    return matmul([list(r) for r in rows], M) if rows else []


def normal_graph_piece_cone(p: GEProblem, C: PolyhedralCone, G: Face, Cpolar: PolyhedralCone) -> PolyhedralCone:
    """``{v : ∇_y g v ∈ G, -∇_y f v ∈ C° ∩ G^⊥}`` for a face ``G`` of ``C``."""
    Gy, Fy = p.Gy, p.Fy
    mFy = [[-x for x in r] for r in Fy]
    Gc = G.cone
    ineq = _rows_on(Gc.A_ineq, Gy) + _rows_on(Cpolar.A_ineq, mFy)
    eq = _rows_on(Gc.A_eq, Gy) + _rows_on(Cpolar.A_eq, mFy) + _rows_on(G.span_basis, Fy)
    return PolyhedralCone(p.k, ineq, eq)


def verify_pair_witness(p: GEProblem, C: PolyhedralCone, v) -> bool:
    """Exact re-check of ``(∇_y g v, -∇_y f v) ∈ gph N_C`` with ``v ≠ 0``.

    Polar membership is tested against the generators of ``C``, not against
    the polar's H-representation used to find the witness.
    """
    if is_zero(v):
        return False
    gv = matvec(p.Gy, v)
    fv = [-x for x in matvec(p.Fy, v)]
    lin, rays = C.generators
    in_polar = all(dot(fv, r) <= 0 for r in rays) and all(dot(fv, b) == 0 for b in lin)
    return C.contains(gv) and in_polar and dot(gv, fv) == 0


def pair_kernel(p: GEProblem, F1: Face, F2: Face):
    """Witness ``(v, G)`` for the pair ``(F1, F2)`` or None when it passes."""
    C = superface_cone(F1, F2)
    P = polar(C)
    for G in enumerate_faces(C):
        t = cone_is_trivial(normal_graph_piece_cone(p, C, G, P))
        if not t.trivial:
            v = t.witness
            if not verify_pair_witness(p, C, v):
                raise WitnessError("face-pair witness failed re-check")
            return v, G
    return None


def check_facepair(p: GEProblem, pairs=None, condition: str = "facepair_EqCompl1") -> Verdict:
    K = p.critical_cone
    for F1, F2 in pairs if pairs is not None else face_pairs(K):
        hit = pair_kernel(p, F1, F2)
        if hit is not None:
            v, G = hit
            prov = {"pair": [list(F1.key), list(F2.key)], "face": list(G.key)}
            return _fails(condition, {"v": v}, prov)
    return Verdict(condition, True)


def check_point_LR(p: GEProblem) -> Verdict:
    """Isolated calmness at the reference point only: the pair (K, lin K)."""
    faces = enumerate_faces(p.critical_cone)
    top = max(faces, key=lambda F: F.dim)
    bottom = min(faces, key=lambda F: F.dim)
    return check_facepair(p, [(top, bottom)], "point_LR")


# ---------------------------------------------------------------------------
# coderivative (Aubin) condition


def aubin_piece_cone(p: GEProblem, C: PolyhedralCone, P: PolyhedralCone) -> PolyhedralCone:
    """Cone of ``(w*, z*)`` with ``-w* ∈ C``, ``z* ∈ C°``, ``∇_y f^T w* + ∇_y g^T z* = 0``."""
    k = p.k
    zero = [ZERO] * k
    ineq = [[-x for x in a] + zero for a in C.A_ineq]
    ineq += [zero + list(a) for a in P.A_ineq]
    eq = [list(a) + zero for a in C.A_eq]
    eq += [zero + list(a) for a in P.A_eq]
    FyT, GyT = transpose(p.Fy), transpose(p.Gy)
    eq += [list(FyT[i]) + list(GyT[i]) for i in range(k)]
    return PolyhedralCone(2 * k, ineq, eq)


def verify_aubin_witness(p: GEProblem, C: PolyhedralCone, w, z, u) -> bool:
    if is_zero(w) and is_zero(u):
        return False
    lin, rays = C.generators
    z_in_polar = all(dot(z, r) <= 0 for r in rays) and all(dot(z, b) == 0 for b in lin)
    ystat = vadd(matvec(transpose(p.Fy), w), matvec(transpose(p.Gy), z))
    u_expected = vadd(matvec(transpose(p.Fx), w), matvec(transpose(p.Gx), z))
    return C.contains([-x for x in w]) and z_in_polar and is_zero(ystat) and u_expected == list(u)


def check_aubin(p: GEProblem) -> Verdict:
    """``(u*, 0) ∈ D*H(w*)  ⇒  w* = 0, u* = 0`` via the face-pair pieces of
    the limiting normal cone to ``gph N_D``.

    ``D*H(w*) = {∇f^T w* + ∇g^T z* : z* ∈ (F1-F2)°, -w* ∈ F1-F2}``. With
    ``∇g`` of full row rank a nonzero ``(w*, z*)`` forces ``(w*, u*) ≠ 0``;
    otherwise the parameter-augmented problem is used.
    """
    q_ = p if p.full_row_rank else p.augmented()
    k = q_.k
    for F1, F2 in face_pairs(q_.critical_cone):
        C = superface_cone(F1, F2)
        P = polar(C)
        t = cone_is_trivial(aubin_piece_cone(q_, C, P))
        if not t.trivial:
            w, z = t.witness[:k], t.witness[k:]
            u = vadd(matvec(transpose(q_.Fx), w), matvec(transpose(q_.Gx), z))
            if not verify_aubin_witness(q_, C, w, z, u):
                raise WitnessError("aubin witness failed re-check")
            prov = {"pair": [list(F1.key), list(F2.key)]}
            if q_ is not p:
                prov["augmented"] = True
            return _fails("aubin_eq100", {"w*": w, "z*": z, "u*": u}, prov)
    return Verdict("aubin_eq100", True)


# ---------------------------------------------------------------------------


def _run_one(p: GEProblem, condition: str) -> Verdict:
    if condition == "face_EqCompl":
        return check_face(p)
    if condition == "facepair_EqCompl1":
        return check_facepair(p)
    if condition == "point_LR":
        return check_point_LR(p)
    if condition == "aubin_eq100":
        return check_aubin(p)
    primal, dual = sc_derivative_H(p, sc_derivative_Q(p))
    if condition == "primal_5_4":
        return check_primal(primal)
    if condition == "dual_5_5":
        return check_dual(dual)
    if condition == "scd_regular":
        return check_scd_regular(extend_to_F(p, (primal, dual))[1])
    raise ValueError(f"unknown condition {condition!r}")


def run_checks(p: GEProblem, conditions=CONDITIONS, workers: int = 1) -> StabilityReport:
    """Evaluate the selected conditions; results do not depend on ``workers``."""
    p.validate()
    conditions = [CLI_NAMES.get(c, c) for c in conditions]
    for c in conditions:
        if c not in CONDITIONS:
            raise ValueError(f"unknown condition {c!r}")
    report = StabilityReport()
    if workers > 1 and len(conditions) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_run_one, [p] * len(conditions), conditions))
    else:
        results = [_run_one(p, c) for c in conditions]
    for v in results:
        report.add(v)
    return report
