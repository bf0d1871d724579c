from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import fixture_path
from instances import random_instance
from scd_stab.oracle import (
    GENERATOR,
    OracleError,
    build_solution_graph,
    closed_form_two_branch,
    verify_isolated_calmness_around,
    verify_semismooth_star,
)
from scd_stab.polyhedra import PolyhedralSet
from scd_stab.problem import NotASolution, ProblemError, load_problem
from scd_stab.rational import vsub

GRID = ["-2", "-1", "-1/2", "0", "1/2", "1"]


def graph(name):
    return build_solution_graph(load_problem(fixture_path(name)))


def test_closed_form():
    assert closed_form_two_branch(-1) == {0, -1}
    assert closed_form_two_branch(0) == {0}
    assert closed_form_two_branch(1) == frozenset()


@pytest.mark.parametrize("x", GRID)
def test_two_branch_pieces_match_closed_form(x):
    G = graph("two_branch.json")
    pts = G.points([x])
    assert {p[0] for p in pts} == closed_form_two_branch(x)
    for y in pts:
        assert G.is_solution([Fraction(x)], list(y))


def test_equation_graph_is_the_diagonal():
    G = graph("equation.json")
    for x in GRID:
        assert G.points([x]) == {(Fraction(x),)}


def test_vertical_line_fiber_is_not_finite():
    assert graph("vertical_line.json").points([0]) is None


def test_infeasible_reference_rejected():
    with pytest.raises(NotASolution):
        graph("infeasible.json")


def test_missing_affine_data():
    with pytest.raises(ProblemError, match="oracle requires affine data"):
        graph("missing_f0.json")


def test_two_branch_is_calm():
    r = verify_isolated_calmness_around(graph("two_branch.json"), "0.1", 2, samples=10_000, seed=42)
    assert r.verdict == "consistent"
    assert r.modulus <= 1 + 1e-9
    assert r.probes > 0 and r.to_json()["generator"] == GENERATOR


def test_equation_has_modulus_one():
    r = verify_isolated_calmness_around(graph("equation.json"), samples=500, seed=3)
    assert r.verdict == "consistent"
    assert r.modulus == pytest.approx(1.0, abs=1e-9)


def test_vertical_line_is_violated_with_exact_counterexample():
    G = graph("vertical_line.json")
    r = verify_isolated_calmness_around(G, samples=200, seed=1)
    assert r.violated and r.to_json()["modulus"] == "inf"
    qd = {k: [Fraction(v) for v in vals] for k, vals in r.quadruple.items()}
    assert G.is_solution(qd["x"], qd["y"]) and G.is_solution(qd["x_probe"], qd["y_probe"])
    dx, dy = vsub(qd["x_probe"], qd["x"]), vsub(qd["y_probe"], qd["y"])
    assert sum(v * v for v in dy) > r.kappa**2 * sum(v * v for v in dx)


def test_no_solutions_to_the_right_of_the_kink():
    # the Aubin property fails: Σ(0) is nonempty while nearby x > 0 give nothing
    G = graph("two_branch.json")
    assert G.points([0])
    for x in ["1/1000", "1/10"]:
        assert G.fiber([x]) == []


def test_report_is_deterministic():
    G = graph("two_branch.json")
    a = verify_isolated_calmness_around(G, samples=300, seed=9)
    b = verify_isolated_calmness_around(G, samples=300, seed=9)
    c = verify_isolated_calmness_around(G, samples=300, seed=9, workers=2)
    assert a.to_json() == b.to_json() == c.to_json()


@pytest.mark.parametrize("kw", [{"radius": 0}, {"kappa": -1}, {"samples": 0}])
def test_bad_parameters(kw):
    with pytest.raises(OracleError):
        verify_isolated_calmness_around(graph("two_branch.json"), **kw)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_anchors_and_counterexamples_are_solutions(seed):
    p = random_instance(seed)
    G = build_solution_graph(p)
    assert G.is_solution(p.xbar, p.ybar)
    r = verify_isolated_calmness_around(G, kappa=10**6, samples=100, seed=seed)
    if r.violated:
        qd = {k: [Fraction(v) for v in vals] for k, vals in r.quadruple.items()}
        assert G.is_solution(qd["x"], qd["y"])
        assert G.is_solution(qd["x_probe"], qd["y_probe"])


# -- semismooth* harness ---------------------------------------------------------


def test_normal_cone_graph_of_half_line():
    rays = [PolyhedralSet(2, [[-1, 0], [0, 1], [0, -1]], [0, 0, 0]),  # (t, 0), t >= 0
            PolyhedralSet(2, [[1, 0], [-1, 0], [0, 1]], [0, 0, 0])]  # (0, s), s <= 0
    r = verify_semismooth_star(rays, [0, 0], epsilons=["1/10"])
    assert r.verdict == "consistent"


def test_linear_graph():
    line = [PolyhedralSet(2, [[2, -1], [-2, 1]], [0, 0])]
    assert verify_semismooth_star(line, [1, 2]).verdict == "consistent"


def test_absolute_value_kink():
    branches = [PolyhedralSet(2, [[-1, 0], [1, -1], [-1, 1]], [0, 0, 0]),
                PolyhedralSet(2, [[1, 0], [-1, -1], [1, 1]], [0, 0, 0])]
    r = verify_semismooth_star(branches, [0, 0])
    assert r.verdict == "consistent" and all(h is not None for h in r.radii)


def test_solution_graph_input_and_bad_point():
    G = graph("two_branch.json")
    assert verify_semismooth_star(G, [0, 0], samples=16).verdict == "consistent"
    with pytest.raises(OracleError):
        verify_semismooth_star(G, [1, 0])
