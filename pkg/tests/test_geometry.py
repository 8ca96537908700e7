import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from usvswarm.geometry import convex_hull, hull_distance, unwrap, wrap, wrapped_diff
from usvswarm.oracles import simplex_grid_distance

# positions in metres on a micrometre grid: rules out underflow and points that
# merge under translation, which no physical configuration produces
coords = st.integers(-50_000_000, 50_000_000).map(lambda k: k / 1e6)
point_sets = st.lists(st.tuples(coords, coords), min_size=1, max_size=7)


def _signed_area(poly):
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def test_triangle_hull_ccw():
    pts = [(0, 0), (0, 1), (1, 0)]
    h = convex_hull(pts)
    assert len(h) == 3 and _signed_area(h) > 0
    assert {tuple(p) for p in h} == {(0.0, 0.0), (0.0, 1.0), (1.0, 0.0)}


def test_interior_point_dropped():
    h = convex_hull([(0, 0), (4, 0), (0, 4), (1, 1)])
    assert len(h) == 3 and not any(np.array_equal(p, [1, 1]) for p in h)


def test_hull_matches_subset_brute_force():
    rng = np.random.default_rng(7)
    for _ in range(20):
        pts = rng.uniform(0, 10, size=(5, 2))
        h = convex_hull(pts)
        # every input point is a convex combination of the hull vertices
        for p in pts:
            assert simplex_grid_distance(p, h)[0] < 1e-9
        # every hull vertex is extreme: outside the hull of the other points
        for k, v in enumerate(pts):
            others = np.delete(pts, k, axis=0)
            in_hull = any(np.array_equal(v, q) for q in h)
            assert in_hull == (simplex_grid_distance(v, others)[0] > 1e-9)


def test_centroid_inside():
    tri = np.array([(0, 0), (6, 0), (0, 3)], dtype=float)
    assert hull_distance(tri.mean(axis=0), tri) == 0.0


def test_single_point_distance():
    assert hull_distance((3, 4), [(0, 0)]) == 5.0


def test_square_distance():
    assert hull_distance((2, 0.5), [(0, 0), (1, 0), (1, 1), (0, 1)]) == pytest.approx(1.0, abs=1e-12)


def test_segment_hull():
    assert hull_distance((1, 1), [(0, 0), (2, 0)]) == pytest.approx(1.0)
    assert hull_distance((1, 0), [(0, 0), (2, 0)]) == 0.0


@settings(max_examples=150)
@given(point_sets, st.tuples(coords, coords))
def test_distance_matches_oracle(pts, x_o):
    d = hull_distance(x_o, pts)
    ref, _ = simplex_grid_distance(x_o, pts)
    assert d >= 0.0
    assert d == pytest.approx(ref, abs=1e-6)


@settings(max_examples=100)
@given(point_sets)
def test_vertices_and_points_inside_own_hull(pts):
    for p in pts:
        assert hull_distance(p, pts) == 0.0


@given(point_sets, st.tuples(coords, coords), st.tuples(coords, coords))
def test_translation_invariance(pts, x_o, shift):
    a = hull_distance(x_o, pts)
    moved = np.asarray(pts) + shift
    b = hull_distance(np.asarray(x_o) + shift, moved)
    assert b == pytest.approx(a, abs=1e-7)


def test_unwrap_examples():
    assert unwrap(3.0, -3.1) == pytest.approx(3.1832, abs=1e-4)
    assert unwrap(0.0, 0.5) == 0.5
    assert unwrap(6.9, 0.7) == pytest.approx(6.9832, abs=1e-4)
    assert unwrap(None, -3.1) == -3.1


@given(st.floats(-100, 100), st.floats(-100, 100))
def test_unwrap_congruent_and_nearest(prev, raw):
    out = unwrap(prev, raw)
    assert abs(out - prev) <= math.pi + 1e-9
    k = (out - raw) / (2 * math.pi)
    assert abs(k - round(k)) < 1e-9


def test_wrapped_diff_examples():
    assert wrapped_diff(0.1, -0.1) == pytest.approx(0.2)
    assert wrapped_diff(3.0, -3.0) == pytest.approx(-0.2832, abs=1e-4)
    assert wrapped_diff(1.7, 1.7) == 0.0


@given(st.floats(-1e3, 1e3))
def test_wrap_range(a):
    w = wrap(a)
    assert -math.pi <= w < math.pi
    assert math.isclose(math.sin(w), math.sin(a), abs_tol=1e-9)
    assert math.isclose(math.cos(w), math.cos(a), abs_tol=1e-9)
