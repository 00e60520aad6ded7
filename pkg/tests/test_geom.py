import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from torus_spreader.errors import InvalidInput
from torus_spreader.geom import (
    ConvexPolygon, Mat2Z, PointCloud, Segment, angular_distance, convex_hull, diameter,
    directed_hausdorff, eps_dense, hausdorff, line_distance, minkowski_zonogon, op_norm,
    primitive_completion, stretch,
)

from oracles import brute_diameter, brute_hausdorff, exact_hull, gcd_completion_ok, sign_sum_hull

coords = st.floats(-50, 50, allow_nan=False, allow_infinity=False)
clouds = st.lists(st.tuples(coords, coords), min_size=1, max_size=40).map(np.array)
small_int = st.integers(-6, 6)
int_vec = st.tuples(small_int, small_int).filter(lambda v: v != (0, 0))
mat_entries = st.floats(-5, 5, allow_nan=False)
matrices = st.tuples(mat_entries, mat_entries, mat_entries, mat_entries).map(
    lambda t: np.array(t).reshape(2, 2))


# --- zonogons ---------------------------------------------------------------

def test_square_zonogon():
    Z = minkowski_zonogon([(1, 0), (0, 1)])
    assert sorted(map(tuple, Z.exact)) == sorted(
        [(Fraction(x), Fraction(y)) for x in (-1, 1) for y in (-1, 1)])


def test_hexagon_zonogon_matches_sign_sums():
    Z = minkowski_zonogon([(2, 0), (1, 1), (0, 1)])
    expected = {(-3, -2), (1, -2), (3, 0), (3, 2), (-1, 2), (-3, 0)}
    assert {(int(x), int(y)) for x, y in Z.exact} == expected
    assert set(Z.exact) == set(sign_sum_hull([(2, 0), (1, 1), (0, 1)]))


def test_single_generator_is_flagged_segment():
    Z = minkowski_zonogon([(1, 0)])
    assert Z.degenerate
    assert set(Z.exact) == {(-1, 0), (1, 0)}


def test_zero_generator_rejected():
    with pytest.raises(InvalidInput):
        minkowski_zonogon([(1, 0), (0, 0)])


@given(st.lists(int_vec, min_size=1, max_size=6))
def test_zonogon_is_point_symmetric(gens):
    Z = minkowski_zonogon(gens)
    verts = set(Z.exact)
    assert verts == {(-x, -y) for x, y in verts}
    assert Z.symmetric


@given(st.lists(int_vec, min_size=1, max_size=7))
def test_zonogon_matches_sign_sum_oracle(gens):
    assert set(minkowski_zonogon(gens).exact) == set(sign_sum_hull(gens))


# --- hausdorff / diameter / density --------------------------------------------

def test_hausdorff_examples():
    sq = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
    assert hausdorff(sq, sq + (3, 0)) == pytest.approx(3.0)
    assert hausdorff(sq, sq) == 0.0
    assert hausdorff([[0, 0]], [[0, 0], [0, 2]]) == 2.0


def test_empty_cloud_rejected():
    with pytest.raises(InvalidInput):
        hausdorff(np.zeros((0, 2)), [[0, 0]])
    with pytest.raises(InvalidInput):
        diameter(np.zeros((0, 2)))


def test_diameter_examples():
    sq = [[0, 0], [1, 0], [1, 1], [0, 1]]
    assert diameter(sq) == pytest.approx(math.sqrt(2))
    assert diameter(minkowski_zonogon([(1, 0), (0, 1)]).vertices) == pytest.approx(2 * math.sqrt(2))
    assert diameter([[3, 4]]) == 0.0


def test_eps_dense_examples():
    seg = np.column_stack([np.linspace(0, 1, 101), np.zeros(101)])
    assert eps_dense([[0, 0], [1, 0]], seg, 0.5)
    assert eps_dense(seg, seg, 1e-9)
    assert not eps_dense([[0, 0]], [[0, 3]], 1.0)
    with pytest.raises(InvalidInput):
        eps_dense(seg, seg, 0.0)


@given(clouds, clouds)
def test_hausdorff_matches_brute_force(A, B):
    assert abs(hausdorff(A, B) - brute_hausdorff(A, B)) <= 1e-12


@given(clouds, clouds, clouds)
def test_hausdorff_triangle_inequality(A, B, C):
    assert hausdorff(A, C) <= hausdorff(A, B) + hausdorff(B, C) + 1e-9


@given(clouds, clouds, st.tuples(st.integers(-64, 64), st.integers(-64, 64)))
def test_hausdorff_translation_invariant(A, B, t):
    # integer shifts of dyadic-safe magnitudes keep the sums exact enough for equality at 1e-12
    t = np.array(t, dtype=float) / 8
    assert hausdorff(A + t, B + t) == pytest.approx(hausdorff(A, B), abs=1e-12)


@given(clouds, clouds)
def test_diameter_of_union_dominates(A, B):
    assert diameter(np.vstack([A, B])) >= max(diameter(A), diameter(B)) - 1e-12


@given(st.lists(st.tuples(coords, coords), min_size=1, max_size=200).map(np.array))
def test_diameter_matches_brute_force(A):
    assert diameter(A) == pytest.approx(brute_diameter(A), abs=1e-9)


@given(clouds, clouds, st.floats(0.01, 10), st.floats(0, 10))
def test_eps_dense_monotone(X, Y, eps, extra):
    if eps_dense(X, Y, eps):
        assert eps_dense(X, Y, eps + extra + 1e-12)


# --- linear algebra -------------------------------------------------------------

def test_op_norm_examples():
    assert op_norm(np.eye(2)) == pytest.approx(1.0)
    assert op_norm(np.diag([1 / 3, 1])) == pytest.approx(1.0)
    assert op_norm(np.array([[1, 1], [0, 1]])) == pytest.approx((1 + math.sqrt(5)) / 2, abs=1e-12)


@given(matrices)
def test_op_norm_matches_svd(M):
    assert op_norm(M) == pytest.approx(np.linalg.svd(M, compute_uv=False)[0], rel=1e-9, abs=1e-12)


@given(matrices, matrices)
def test_op_norm_submultiplicative(A, B):
    assert op_norm(A @ B) <= op_norm(A) * op_norm(B) * (1 + 1e-9) + 1e-12


@given(st.integers(-20, 20), st.integers(-20, 20))
def test_op_norm_of_inverse_pair(a, b):
    A = np.array([[1 + a * b, a], [b, 1]], dtype=float)
    assert op_norm(A) * op_norm(np.linalg.inv(A)) >= 1 - 1e-9


def test_primitive_completion_examples():
    assert primitive_completion((0, 1)) == Mat2Z.identity()
    assert primitive_completion((2, 1)).rows() == [[1, 2], [0, 1]]
    assert primitive_completion((3, 2)).rows() == [[-1, 3], [-1, 2]]


@pytest.mark.parametrize("w", [(0, 0), (2, 4), (3, 0)])
def test_primitive_completion_rejects(w):
    with pytest.raises(InvalidInput):
        primitive_completion(w)


@given(int_vec.filter(lambda v: math.gcd(*v) == 1))
def test_primitive_completion_has_det_one_and_column(w):
    assert gcd_completion_ok(w, primitive_completion(w).rows())


def test_mat2z_requires_unimodular():
    with pytest.raises(InvalidInput):
        Mat2Z(2, 0, 0, 1)
    A = Mat2Z(2, 1, 1, 1)
    assert (A @ A.inverse()).is_identity


def test_angular_distance_examples():
    assert angular_distance((1, 0), (0, 1)) == pytest.approx(math.pi / 2)
    assert angular_distance((1, 0), (2, 0)) == 0.0
    assert angular_distance((1, 0), (-1, 0)) == pytest.approx(math.pi)
    assert line_distance((1, 0), (-1, 0)) == pytest.approx(0.0)
    with pytest.raises(InvalidInput):
        angular_distance((0, 0), (1, 0))


# --- polygons, segments, stretch ---------------------------------------------------

def test_segment_requires_length():
    with pytest.raises(InvalidInput):
        Segment((1, 1), (1, 1))
    s = Segment((0, 0), (3, 4))
    assert s.length == 5.0
    assert s.slope == pytest.approx(4 / 3)


@given(st.lists(st.tuples(st.integers(-30, 30), st.integers(-30, 30)), min_size=3, max_size=80))
def test_convex_hull_matches_exact_oracle(pts):
    expected = exact_hull(pts)
    hull = convex_hull(np.array(pts, dtype=float))
    got = {(Fraction(x), Fraction(y)) for x, y in hull.vertices}
    if len(expected) >= 3:
        assert got == set(expected)


@given(st.lists(st.tuples(coords, coords), min_size=3, max_size=30))
def test_polygon_distance_zero_inside(pts):
    hull = convex_hull(np.array(pts))
    assert np.all(hull.distance(hull.vertices) <= 1e-9)
    assert np.all(hull.distance([hull.center]) <= 1e-9)


def test_stretch_examples():
    X = PointCloud([[0, 0]])
    S = stretch(X, (0, 1), 50)
    assert S.points[:, 0].max() == 0.0
    assert S.points[:, 1].min() == pytest.approx(-1) and S.points[:, 1].max() == pytest.approx(1)
    g = np.linspace(0, 1, 11)
    gx, gy = np.meshgrid(g, g)
    grid = PointCloud(np.column_stack([gx.ravel(), gy.ravel()]), 0.05 * math.sqrt(2))
    S = stretch(grid, (1, 0), 20)
    assert S.points[:, 0].min() == pytest.approx(-1) and S.points[:, 0].max() == pytest.approx(2)
    S = stretch(PointCloud([[1, 1]]), (1, 1), 20)
    assert np.allclose(S.points[0], (0, 0)) and np.allclose(S.points[-1], (2, 2))
    with pytest.raises(InvalidInput):
        stretch(X, (0, 0), 10)


@settings(max_examples=40)
@given(clouds, st.tuples(st.floats(-3, 3), st.floats(-3, 3)).filter(lambda v: math.hypot(*v) > 0.1))
def test_stretch_hint_covers_true_stretch(P, v):
    # the hint must bound the distance from any point of X + [-v, v] to the sample
    X = PointCloud(P)
    S = stretch(X, v, 10)
    s = np.linspace(-1, 1, 977)
    dense = (P[:, None, :] + s[None, :, None] * np.asarray(v)[None, None, :]).reshape(-1, 2)
    assert directed_hausdorff(dense, S.points) <= S.resolution_hint + 1e-12


def test_polygon_sample_hint_is_valid():
    poly = ConvexPolygon([(0, 0), (3, 0), (1, 2)])
    S = poly.sample(0.1)
    rng = np.random.default_rng(0)
    # random points inside the triangle via barycentric coordinates
    w = rng.dirichlet([1, 1, 1], 5000)
    inside = w @ poly.vertices
    assert directed_hausdorff(inside, S.points) <= S.resolution_hint
    assert np.all(poly.distance(S.points) <= 1e-12)
