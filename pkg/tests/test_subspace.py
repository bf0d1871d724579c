import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scd_stab.subspace import (
    Subspace,
    SubspaceError,
    adjoint,
    complement,
    distance,
    from_spanning_matrix,
    intersect_coordinate,
    linear_image,
    projection,
    rotation,
    span,
)

SQ5 = math.sqrt(5)


def line_distance(a, b):
    """Closed form for two lines in R^2: the 2x2 matrix P1 - P2 has
    eigenvalues +-|sin(angle)|, found from its trace (0) and determinant."""
    u = np.asarray(a, float) / np.linalg.norm(a)
    v = np.asarray(b, float) / np.linalg.norm(b)
    D = np.outer(u, u) - np.outer(v, v)
    det = D[0, 0] * D[1, 1] - D[0, 1] * D[1, 0]
    return math.sqrt(max(0.0, -det))


def random_subspace(rng, n, m, dim=None):
    dim = n if dim is None else dim
    if dim == 0:
        return Subspace.zero((n, m))
    return from_spanning_matrix(rng.standard_normal((dim, n + m)), (n, m))


@st.composite
def grassmann_pairs(draw):
    n = draw(st.integers(1, 6))
    m = draw(st.integers(1, 6))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    return random_subspace(rng, n, m), random_subspace(rng, n, m)


# -- construction --------------------------------------------------------


def test_single_column_normalized():
    L = from_spanning_matrix([[1, 2]], (1, 1))
    assert L.dim == 1
    assert np.allclose(np.abs(L.basis[0]), [1 / SQ5, 2 / SQ5])


def test_dependent_columns_collapse():
    L = from_spanning_matrix([[1, 0], [2, 0]], (1, 1))
    assert L.dim == 1
    assert L.contains([1, 0]) and not L.contains([0, 1])


def test_graph_of_linear_map():
    # rge(I, A^T) for A = (2)
    L = from_spanning_matrix([[1, 2]], (1, 1))
    assert L.equals(span([[1 / SQ5, 2 / SQ5]], (1, 1)))


def test_zero_input_rejected():
    with pytest.raises(SubspaceError, match="zero subspace requires explicit dimension 0"):
        from_spanning_matrix([[0, 0]], (1, 1))


def test_non_orthonormal_basis_rejected():
    with pytest.raises(SubspaceError):
        Subspace((1, 1), np.array([[1.0, 1.0]]))


def test_json_round_trip():
    L = from_spanning_matrix([[1, 2, 0], [0, 1, 1]], (2, 1))
    data = L.to_json()
    assert data["ambient"] == 3 and data["split"] == [2, 1]
    assert Subspace.from_json(data).equals(L)


# -- projections and distance ----------------------------------------------


def test_projection_examples():
    assert np.allclose(projection(span([[1, 0]], (1, 1))), np.diag([1, 0]))
    assert np.allclose(projection(span([[1, 1]], (1, 1))), [[0.5, 0.5], [0.5, 0.5]])
    assert np.allclose(projection(Subspace.zero((1, 1))), np.zeros((2, 2)))


def test_distance_examples():
    e1, e2 = span([[1, 0]], (1, 1)), span([[0, 1]], (1, 1))
    assert distance(e1, e2) == pytest.approx(1.0)
    assert distance(e1, e1) == pytest.approx(0.0, abs=1e-15)
    diag = span([[1, 1]], (1, 1))
    assert distance(e1, diag) == pytest.approx(0.70710678, abs=1e-8)
    assert distance(e1, diag) == pytest.approx(line_distance([1, 0], [1, 1]), abs=1e-12)


@settings(max_examples=200)
@given(st.floats(-10, 10), st.floats(-10, 10), st.floats(-10, 10), st.floats(-10, 10))
def test_distance_matches_closed_form_for_lines(a, b, c, d):
    if math.hypot(a, b) < 1e-3 or math.hypot(c, d) < 1e-3:
        return
    L1, L2 = span([[a, b]], (1, 1)), span([[c, d]], (1, 1))
    assert distance(L1, L2) == pytest.approx(line_distance([a, b], [c, d]), abs=1e-9)


def test_distance_dimension_mismatch():
    with pytest.raises(SubspaceError):
        distance(span([[1, 0]], (1, 1)), span([[1, 0, 0]], (2, 1)))


@settings(max_examples=100)
@given(grassmann_pairs())
def test_distance_is_a_bounded_symmetric_metric(pair):
    L1, L2 = pair
    d = distance(L1, L2)
    assert 0 <= d <= 1 + 1e-9
    assert d == pytest.approx(distance(L2, L1), abs=1e-12)
    assert distance(L1, L1) <= 1e-12


# -- complement and adjoint ----------------------------------------------


def test_complement_examples():
    assert complement(span([[1, 0]], (1, 1))).equals(span([[0, 1]], (1, 1)))
    assert complement(Subspace.full((1, 1))).dim == 0
    assert complement(span([[1, 2]], (1, 1))).equals(span([[-2, 1]], (1, 1)))


@settings(max_examples=100)
@given(st.integers(1, 5), st.integers(0, 5), st.integers(0, 2**32 - 1))
def test_complement_projections_sum_to_identity(n, m, seed):
    rng = np.random.default_rng(seed)
    dim = int(rng.integers(0, n + m + 1))
    L = random_subspace(rng, n, m, dim)
    C = complement(L)
    assert L.dim + C.dim == n + m
    assert np.allclose(projection(L) + projection(C), np.eye(n + m), atol=1e-9)


def test_rotation_block():
    S = rotation(2, 1)
    assert np.allclose(S @ [1, 2, 3], [-3, 1, 2])


def test_adjoint_examples():
    assert adjoint(span([[1, 2]], (1, 1))).equals(span([[1, 2]], (1, 1)))
    zero_map = span([[1, 0]], (1, 1))
    assert adjoint(zero_map).equals(zero_map)


@settings(max_examples=50)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_adjoint_of_graph_is_graph_of_transpose(n, m, seed):
    rng = np.random.default_rng(seed)
    A = rng.integers(-3, 4, size=(m, n)).astype(float)
    L = from_spanning_matrix(np.hstack([np.eye(n), A.T]), (n, m))
    Lt = from_spanning_matrix(np.hstack([np.eye(m), A]), (m, n))
    assert adjoint(L).split == (m, n)
    assert adjoint(L).equals(Lt)


def test_adjoint_needs_grassmann_dimension():
    with pytest.raises(SubspaceError):
        adjoint(Subspace.full((1, 1)))


@settings(max_examples=100)
@given(grassmann_pairs())
def test_adjoint_involution_and_isometry(pair):
    L1, L2 = pair
    assert distance(adjoint(adjoint(L1)), L1) <= 1e-8
    assert abs(distance(L1, L2) - distance(adjoint(L1), adjoint(L2))) <= 1e-8


# -- images and intersections --------------------------------------------


def test_linear_image_examples():
    L = span([[1, 0]], (1, 1))
    assert linear_image(np.eye(2), L).equals(L)
    assert linear_image(2 * np.eye(2), L).equals(L)
    assert linear_image([[1, 0], [1, 1]], L).equals(span([[1, 1]], (1, 1)))


def test_linear_image_rank_deficient():
    with pytest.raises(SubspaceError):
        linear_image([[1, 0], [1, 0]], span([[1, 0]], (1, 1)))


def test_linear_image_is_continuous_in_the_matrix():
    rng = np.random.default_rng(3)
    L = random_subspace(rng, 3, 2)
    A = rng.standard_normal((5, 5)) + 5 * np.eye(5)
    E = rng.standard_normal((5, 5))
    hs = [10.0**-t for t in range(3, 9)]
    ds = [distance(linear_image(A + h * E, L), linear_image(A, L)) for h in hs]
    C = 2 * ds[0] / hs[0]  # first-order constant fitted at the coarsest step
    assert all(a > b for a, b in zip(ds, ds[1:]))
    for h, d in zip(hs, ds):
        assert d <= C * h + 1e-12


def test_intersect_coordinate_examples():
    L = Subspace.full((1, 1))
    assert intersect_coordinate(L, [True, False]).equals(span([[0, 1]], (1, 1)))
    assert intersect_coordinate(span([[1, 1]], (1, 1)), [True, False]).dim == 0
    L3 = span([[1, 0, 0], [0, 1, 1]], (2, 1))
    assert intersect_coordinate(L3, [False, False, True]).equals(span([[1, 0, 0]], (2, 1)))


@settings(max_examples=60)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_intersection_lies_in_both(n, m, seed):
    rng = np.random.default_rng(seed)
    L = random_subspace(rng, n, m, int(rng.integers(1, n + m + 1)))
    mask = rng.random(n + m) < 0.5
    M = intersect_coordinate(L, mask)
    for v in M.basis:
        assert L.contains(v)
        assert np.allclose(v[mask], 0, atol=1e-9)
    assert M.dim >= L.dim - int(mask.sum())


def test_random_pairs_never_exceed_unit_distance():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        n, m = rng.integers(1, 5, size=2)
        assert distance(random_subspace(rng, n, m), random_subspace(rng, n, m)) <= 1 + 1e-9
