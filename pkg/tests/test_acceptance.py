"""The six acceptance criteria, each run at its stated tolerance and time budget.

Every test prints one ``PASS``/``FAIL`` line to the terminal, also under
captured output, and then asserts.
"""
import json
import time

import numpy as np
import pytest

from conftest import fixture_path
from instances import suite
from scd_stab.calculus import extend_to_F, sc_derivative_H, sc_derivative_Q
from scd_stab.checks import (
    check_aubin,
    check_dual,
    check_face,
    check_facepair,
    check_point_LR,
    check_primal,
    check_scd_regular,
    verify_aubin_witness,
    verify_face_witness,
    verify_pair_witness,
)
from scd_stab.cli import main
from scd_stab.oracle import build_solution_graph, verify_isolated_calmness_around
from scd_stab.polyhedra import brute_force_faces, enumerate_faces, face_pairs, superface_cone
from scd_stab.rational import ZERO, dot, is_zero, nullspace, qvec
from scd_stab.subspace import adjoint, distance, from_spanning_matrix

SUITE_SIZE = 200
ORACLE_SEED = 20240


@pytest.fixture(scope="module")
def instances():
    return suite(SUITE_SIZE)


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\n[acceptance {n}] {'PASS' if ok else 'FAIL'}: {detail}")
        assert ok, detail

    return emit


def test_criterion_1_two_branch_end_to_end(capsys, report):
    t0 = time.perf_counter()
    code = main(["--json", "check", str(fixture_path("two_branch.json"))])
    elapsed = time.perf_counter() - t0
    data = json.loads(capsys.readouterr().out)
    got = {v["condition"]: v for v in data["verdicts"]}
    holds = all(got[c]["verdict"] == "holds" for c in ("primal_5_4", "dual_5_5", "face_EqCompl",
                                                        "facepair_EqCompl1", "point_LR"))
    aubin = got["aubin_eq100"]
    ok = (code == 2 and holds and aubin["verdict"] == "fails"
          and aubin["witness"]["w*"] == ["-1"] and elapsed < 1.0)
    report(1, ok, f"primal/dual/face/facepair/point hold, aubin fails with w*={aubin['witness'].get('w*')}, "
                  f"{elapsed:.3f}s (< 1 s)")


def test_criterion_2_equivalence_suite(instances, report):
    t0 = time.perf_counter()
    discrepancies = []
    n_hold = 0
    for p in instances:
        primal, dual = sc_derivative_H(p, sc_derivative_Q(p))
        verdicts = (check_primal(primal).holds, check_dual(dual).holds,
                    check_face(p).holds, check_facepair(p).holds)
        n_hold += verdicts[0]
        if len(set(verdicts)) != 1:
            discrepancies.append((p.name, verdicts))
    elapsed = time.perf_counter() - t0
    ok = not discrepancies and elapsed < 60
    report(2, ok, f"{len(instances)} instances ({n_hold} hold), {len(discrepancies)} discrepancies, "
                  f"{elapsed:.1f}s (< 60 s)")


def test_criterion_3_duality_isometry(report):
    rng = np.random.default_rng(3)
    t0 = time.perf_counter()
    worst_inv = worst_iso = 0.0
    for _ in range(500):
        n, m = (int(v) for v in rng.integers(1, 7, size=2))
        L1 = from_spanning_matrix(rng.standard_normal((n, n + m)), (n, m))
        L2 = from_spanning_matrix(rng.standard_normal((n, n + m)), (n, m))
        worst_inv = max(worst_inv, distance(adjoint(adjoint(L1)), L1))
        worst_iso = max(worst_iso, abs(distance(L1, L2) - distance(adjoint(L1), adjoint(L2))))
    elapsed = time.perf_counter() - t0
    ok = worst_inv <= 1e-8 and worst_iso <= 1e-8 and elapsed < 10
    report(3, ok, f"500 subspaces, max involution error {worst_inv:.2e}, max isometry error {worst_iso:.2e}, "
                  f"{elapsed:.2f}s (< 10 s)")


def test_criterion_4_oracle_concordance(instances, report):
    t0 = time.perf_counter()
    bad, violated, consistent = [], 0, 0
    for p in instances:
        face_holds = check_face(p).holds
        r = verify_isolated_calmness_around(build_solution_graph(p), "1/10", 10**6, samples=1000, seed=ORACLE_SEED)
        violated += r.violated
        consistent += not r.violated
        if r.violated and face_holds:
            bad.append(p.name)
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < 300
    report(4, ok, f"{violated} violated (all with failing face condition), {consistent} consistent, "
                  f"{len(bad)} discordant, {elapsed:.1f}s (< 300 s)")


def test_criterion_5_face_lattice(cone_corpus, report):
    t0 = time.perf_counter()
    cones = [C for C in cone_corpus if len(C.A_ineq) <= 6]
    mismatches = [i for i, C in enumerate(cones) if {F.active for F in enumerate_faces(C)} != brute_force_faces(C)]
    elapsed = time.perf_counter() - t0
    ok = not mismatches and elapsed < 30 and cones
    report(5, ok, f"{len(cones)} corpus cones, {len(mismatches)} mismatches, {elapsed:.2f}s (< 30 s)")


# -- criterion 6: every failure witness re-verified --------------------------------


def in_subspace(z, basis):
    """Membership through the orthogonal complement, not through a rank test."""
    perp = nullspace([list(v) for v in basis], len(z)) if basis else [
        [int(i == j) for j in range(len(z))] for i in range(len(z))]
    return all(dot(w, z) == 0 for w in perp)


def member_for(coll, provenance):
    (M,) = [M for M in coll.members if M.tag == provenance]
    return M


def pair_cone(K, provenance):
    keys = tuple(tuple(x) for x in provenance["pair"])
    (C,) = [superface_cone(F1, F2) for F1, F2 in face_pairs(K) if (F1.key, F2.key) == keys]
    return C


def reverify(p):
    """Recompute every failing verdict of ``p`` and check its witness exactly."""
    checked = failed = 0
    k = p.k
    primal, dual = sc_derivative_H(p, sc_derivative_Q(p))
    K = p.critical_cone

    def tally(ok):
        nonlocal checked, failed
        checked += 1
        failed += not ok

    v = check_primal(primal)
    if not v.holds:
        w = qvec(v.witness["v"])
        z = [ZERO] * primal.param_dim + w + [ZERO] * k
        tally(not is_zero(w) and in_subspace(z, member_for(primal, v.provenance).basis))
    v = check_dual(dual)
    if not v.holds:
        w, u = qvec(v.witness["w*"]), qvec(v.witness["u*"])
        M = member_for(dual, v.provenance)
        z = w + u + [ZERO] * (M.split[1] - len(u))
        tally(not (is_zero(w) and is_zero(u)) and in_subspace(z, M.basis))
    ext_dual = extend_to_F(p, (primal, dual))[1]
    v = check_scd_regular(ext_dual)
    if not v.holds:
        s = qvec(v.witness["v*"])
        M = member_for(ext_dual, v.provenance)
        tally(not is_zero(s) and in_subspace(s + [ZERO] * len(s), M.basis))
    v = check_face(p)
    if not v.holds:
        (F,) = [F for F in enumerate_faces(K) if list(F.key) == v.provenance["face"]]
        tally(verify_face_witness(p, F, qvec(v.witness["v"])))
    for check in (check_facepair, check_point_LR):
        v = check(p)
        if not v.holds:
            tally(verify_pair_witness(p, pair_cone(K, v.provenance), qvec(v.witness["v"])))
    v = check_aubin(p)
    if not v.holds:
        q_ = p.augmented() if v.provenance.get("augmented") else p
        w, z, u = (qvec(v.witness[n]) for n in ("w*", "z*", "u*"))
        tally(verify_aubin_witness(q_, pair_cone(q_.critical_cone, v.provenance), w, z, u))
    return checked, failed


def test_criterion_6_witness_validity(instances, report):
    checked = failed = 0
    for p in instances:
        c, f = reverify(p)
        checked += c
        failed += f
    ok = failed == 0 and checked > 0
    report(6, ok, f"{checked} failure witnesses re-verified, {failed} invalid")
