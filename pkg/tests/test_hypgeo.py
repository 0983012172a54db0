import cmath
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from matchperc import hypgeo as hg
from matchperc.hypgeo import EUCLIDEAN, HYPERBOLIC, GeodesicParam, Isometry


def sinh_half_distance(a, b):
    """Independent oracle: sinh(d/2) = |a - b| / sqrt((1 - |a|^2)(1 - |b|^2))."""
    return 2 * math.asinh(abs(a - b) / math.sqrt((1 - abs(a) ** 2) * (1 - abs(b) ** 2)))


def disk_point(r=0.95):
    return st.builds(lambda t, s: r * math.sqrt(s) * cmath.exp(1j * t),
                     st.floats(0, 2 * math.pi), st.floats(0, 1))


plane_point = st.builds(complex, st.floats(-20, 20), st.floats(-20, 20))


def distinct(a, b):
    return abs(a - b) > 1e-3


def test_distance_known_values():
    assert hg.distance(0j, 0.5 + 0j) == pytest.approx(math.log(3), abs=1e-14)
    assert hg.distance(0j, 0j) == 0
    assert hg.distance(1 + 1j, 4 + 5j, EUCLIDEAN) == pytest.approx(5.0)


def test_point_validation():
    with pytest.raises(hg.GeometryError):
        hg.point(1.0, 0.0)
    assert hg.point(3.0, 4.0, EUCLIDEAN) == 3 + 4j


@settings(max_examples=200, deadline=None)
@given(disk_point(), disk_point())
def test_distance_matches_closed_form(a, b):
    assert hg.distance(a, b) == pytest.approx(sinh_half_distance(a, b), rel=1e-9, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(disk_point(), disk_point(), disk_point())
def test_triangle_inequality(a, b, c):
    assert hg.distance(a, c) <= hg.distance(a, b) + hg.distance(b, c) + 1e-9


@settings(max_examples=200, deadline=None)
@given(disk_point(0.9), disk_point(0.9), st.integers(0, 2 ** 32 - 1))
def test_isometries_preserve_distance(a, b, seed):
    T = Isometry.random(np.random.default_rng(seed))
    assert hg.distance(T(a), T(b)) == pytest.approx(hg.distance(a, b), abs=1e-7)
    assert T.inverse()(T(a)) == pytest.approx(a, abs=1e-10)


@settings(max_examples=200, deadline=None)
@given(disk_point(), disk_point())
def test_geodesic_through_contains_both_points(a, b):
    if not distinct(a, b):
        return
    g = hg.geodesic_through(a, b)
    assert g.contains(a, 1e-7) and g.contains(b, 1e-7)
    assert abs(g.orthogonality_residual()) < 1e-7


@settings(max_examples=150, deadline=None)
@given(disk_point(), disk_point(), disk_point())
def test_projection_is_nearest_point(a, b, x):
    if not distinct(a, b):
        return
    g = hg.geodesic_through(a, b)
    px = hg.project(x, g)
    assert g.contains(px, 1e-7)
    assert hg.project(px, g) == pytest.approx(px, abs=1e-8)
    # dense sampling along the geodesic never gets closer than the projection
    par = GeodesicParam(g, px)
    d0 = hg.distance(x, px)
    for s in np.linspace(-3, 3, 61):
        if s:
            assert hg.distance(x, par.point_at(float(s))) >= d0 - 1e-9


@settings(max_examples=150, deadline=None)
@given(plane_point, plane_point, plane_point)
def test_euclidean_projection(a, b, x):
    if not distinct(a, b):
        return
    g = hg.geodesic_through(a, b, EUCLIDEAN)
    px = hg.project(x, g)
    u = (b - a) / abs(b - a)
    assert ((x - px) * u.conjugate()).real == pytest.approx(0, abs=1e-7)


@settings(max_examples=200, deadline=None)
@given(disk_point(0.9), disk_point(0.9), st.floats(-6, 6))
def test_parametrization_is_arc_length(a, b, s):
    if not distinct(a, b):
        return
    g = hg.geodesic_through(a, b)
    par = GeodesicParam(g, a)
    z = par.point_at(s)
    assert par.value(z) == pytest.approx(s, abs=1e-7)
    assert hg.distance(a, z) == pytest.approx(abs(s), abs=1e-6)
    assert par.value(b) == pytest.approx(hg.distance(a, b), abs=1e-7)


@settings(max_examples=100, deadline=None)
@given(disk_point(0.9), disk_point(0.9), disk_point(0.9), disk_point(0.9))
def test_crossing_value_lies_on_segment(a, b, x, y):
    if not (distinct(a, b) and distinct(x, y)):
        return
    par = GeodesicParam(hg.geodesic_through(a, b), a)
    F = par.frame()
    if par.side(x, F) * par.side(y, F) >= -1e-6:
        return
    v = par.crossing_value(x, y, F)
    z = par.point_at(v)
    # z lies on the geodesic segment [x, y]
    assert hg.distance(x, z) + hg.distance(z, y) == pytest.approx(hg.distance(x, y), abs=1e-6)


def test_reflection_fixes_geodesic_and_swaps_sides():
    a, b = 0.3 + 0.1j, -0.2 + 0.5j
    g = hg.geodesic_through(a, b)
    R = Isometry.reflection(g)
    R2 = Isometry.reflection_through(a, b)
    for z in (a, b, hg.project(0.1j, g)):
        assert R(z) == pytest.approx(z, abs=1e-12)
        assert R2(z) == pytest.approx(z, abs=1e-12)
    par = GeodesicParam(g, a)
    w = 0.05 - 0.4j
    assert par.side(w) * par.side(R(w)) < 0
    assert R2(w) == pytest.approx(R(w), abs=1e-12)


def test_mp_points_agree_with_floats():
    a, b = 0.3 + 0.2j, -0.5 + 0.1j
    with mpmath.workdps(40):
        d = hg.distance(mpmath.mpc(a), mpmath.mpc(b))
    assert float(d) == pytest.approx(hg.distance(a, b), abs=1e-12)


def test_mp_points_near_the_boundary():
    with mpmath.workdps(60):
        r = mpmath.mpf(1) - mpmath.mpf(10) ** -30
        d = hg.distance(mpmath.mpc(0), mpmath.mpc(r))
        # 2 atanh(1 - e) = log((2 - e)/e); 1 - r^2 keeps about 30 of the 60 digits
        assert abs(d - mpmath.log((2 - mpmath.mpf(10) ** -30) / mpmath.mpf(10) ** -30)) < 1e-25
