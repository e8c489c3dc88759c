import numpy as np
import pytest
from shapely.geometry import MultiPoint, Point, Polygon

import conecert as cc
from conecert.errors import DomainError

from oracles import TRIANGLE

DIAG = (1.0 / np.sqrt(2.0), 1.0 / np.sqrt(2.0))


def shapely_hull_vertices(points):
    hull = MultiPoint([tuple(p) for p in points]).convex_hull
    if hull.geom_type == "Point":
        return np.array(hull.coords)
    if hull.geom_type == "LineString":
        return np.array(hull.coords)
    return np.array(hull.exterior.coords)[:-1]


def as_vertex_set(verts, digits=9):
    return {tuple(np.round(v, digits)) for v in np.asarray(verts)}


def test_convex_hull_matches_shapely():
    rng = np.random.default_rng(0)
    for _ in range(25):
        pts = rng.random((rng.integers(3, 40), 2))
        ours = cc.convex_hull(pts)
        ref = shapely_hull_vertices(pts)
        assert as_vertex_set(ours) == as_vertex_set(ref)


def test_convex_hull_degenerate():
    assert cc.convex_hull([(0.5, 0.5)]).shape == (1, 2)
    seg = cc.convex_hull([(0, 0), (1, 1), (0.5, 0.5), (0.25, 0.25)])
    assert as_vertex_set(seg) == {(0.0, 0.0), (1.0, 1.0)}
    with pytest.raises(DomainError):
        cc.convex_hull(np.empty((0, 2)))


def test_collinear_points_dropped():
    hull = cc.convex_hull([(0, 0), (1, 0), (2, 0), (1, 1), (0.5, 0.0)])
    assert as_vertex_set(hull) == {(0.0, 0.0), (2.0, 0.0), (1.0, 1.0)}


def test_point_hull_distance_against_shapely():
    rng = np.random.default_rng(1)
    for _ in range(25):
        pts = rng.random((12, 2))
        hull = cc.convex_hull(pts)
        poly = Polygon([tuple(p) for p in hull])
        for _ in range(5):
            q = rng.random(2) * 2 - 0.5
            assert cc.point_hull_distance(q, hull) == \
                pytest.approx(poly.distance(Point(*q)), abs=1e-9)


def test_hausdorff_against_shapely_oracle():
    rng = np.random.default_rng(2)
    for _ in range(10):
        A = cc.convex_hull(rng.random((10, 2)))
        B = cc.convex_hull(rng.random((10, 2)) + 0.2)
        pa = Polygon([tuple(p) for p in A])
        pb = Polygon([tuple(p) for p in B])
        ref = max(max(pb.distance(Point(*v)) for v in A),
                  max(pa.distance(Point(*v)) for v in B))
        assert cc.hausdorff_distance(A, B) == pytest.approx(ref, abs=1e-9)


def test_sample_ball_includes_ring_and_center():
    pts = cc.sample_ball_cone(np.asarray(DIAG), 0.05)
    r = np.hypot(pts[:, 0], pts[:, 1])
    assert np.any(np.abs(r - 1.0) < 1e-12)
    assert np.any(np.all(np.abs(pts - np.asarray(DIAG)) < 1e-15, axis=1))
    d = np.hypot(pts[:, 0] - DIAG[0], pts[:, 1] - DIAG[1])
    assert np.all(d <= 0.05 * (1 + 1e-9))
    assert np.all(pts >= 0.0)


def test_envelope_triangle_at_diagonal():
    T = cc.polar_jump_operator(1.0)
    approx = cc.cc_envelope(T, DIAG)
    assert approx.converged
    assert cc.hausdorff_distance(approx.intersection, TRIANGLE) < 1e-2
    # shapely cross-check of the same comparison
    ours = Polygon([tuple(p) for p in approx.intersection])
    ref = Polygon([tuple(p) for p in TRIANGLE])
    assert max(max(ref.distance(Point(*v)) for v in approx.intersection),
               max(ours.distance(Point(*v)) for v in TRIANGLE)) < 1e-2


def test_envelope_singleton_off_circle():
    T = cc.polar_jump_operator(1.0)
    for x in [(0.5, 0.5), (1.5, 0.2), (0.1, 0.9)]:
        approx = cc.cc_envelope(T, x)
        assert cc.polygon_diameter(approx.intersection) < 1e-6
        assert cc.point_hull_distance((0.0, 0.0), approx.intersection) < 1e-9


def test_envelope_segments_on_circle():
    # away from the diagonal, on the circle, the envelope converges to the
    # segment joining the origin and the single jump image
    T = cc.polar_jump_operator(1.0)
    low = cc.cc_envelope(T, (np.cos(0.2), np.sin(0.2)))
    for v in low.intersection:
        assert abs(v[0]) < 1e-9  # on the segment (0,0)-(0,1)
    high = cc.cc_envelope(T, (np.cos(1.2), np.sin(1.2)))
    for v in high.intersection:
        assert abs(v[1]) < 1e-9  # on the segment (0,0)-(1,0)


def test_envelope_identity_singleton():
    approx = cc.cc_envelope(lambda p: p, (0.3, 0.4))
    assert cc.point_hull_distance((0.3, 0.4), approx.intersection) <= 1e-12
    assert cc.polygon_diameter(approx.intersection) <= 2.1 * approx.eps_ladder[-1]


def test_envelope_constant_map():
    approx = cc.cc_envelope(lambda p: (0.2, 0.7), (1.0, 1.0))
    assert cc.polygon_diameter(approx.intersection) == 0.0
    assert cc.envelope_condition_check(lambda p: (0.2, 0.7),
                                       np.array([1.0, 1.0]), approx)


def test_hull_nesting_and_intersection(step_config_text):
    T = cc.polar_jump_operator(1.0)
    for x in [DIAG, (0.5, 0.5), (1.0, 0.0)]:
        approx = cc.cc_envelope(T, x)
        for small, large in zip(approx.hulls[1:], approx.hulls[:-1]):
            for v in small:
                assert cc.point_hull_distance(v, large) <= 1e-9
        for v in approx.intersection:
            for hull in approx.hulls:
                assert cc.point_hull_distance(v, hull) <= 1e-9


def test_hull_nesting_continuous_map():
    f = lambda p: (p[0] ** 2 + 0.1, 0.5 * p[1] + 0.2)
    approx = cc.cc_envelope(f, (0.6, 0.8))
    for small, large in zip(approx.hulls[1:], approx.hulls[:-1]):
        for v in small:
            assert cc.point_hull_distance(v, large) <= 1e-9


def test_envelope_ladder_validation():
    T = cc.polar_jump_operator(1.0)
    with pytest.raises(DomainError):
        cc.cc_envelope(T, DIAG, eps_ladder=(0.1, 0.2))
    with pytest.raises(DomainError):
        cc.cc_envelope(T, DIAG, eps_ladder=(0.1, -0.01))
    with pytest.raises(DomainError):
        cc.cc_envelope(T, (-1.0, 0.5))


def test_condition_check_polar():
    T = cc.polar_jump_operator(1.0)
    x = np.asarray(DIAG)
    approx = cc.cc_envelope(T, x)
    # x lies outside its own envelope triangle (x1 + x2 > 1)
    assert cc.envelope_condition_check(T, x, approx)
    # the origin is a true fixed point with singleton envelope
    origin = np.zeros(2)
    approx0 = cc.cc_envelope(T, origin)
    assert cc.envelope_condition_check(T, origin, approx0)
    # points on the circle off the diagonal are not fixed and miss their
    # envelope segment
    x2 = np.array([1.0, 0.0])
    assert cc.envelope_condition_check(T, x2, cc.cc_envelope(T, x2))


def test_annulus_scan_polar():
    T = cc.polar_jump_operator(1.0)
    report = cc.annulus_fixed_point_scan(T, 1.0, 2.0, n=100)
    # everything off the ring has residual at least 1; the ring residual is
    # at least the chord 2 sin(pi/8)
    assert report.min_residual > 0.1
    assert report.min_residual == pytest.approx(2 * np.sin(np.pi / 8), abs=0.02)


def test_annulus_scan_identity_and_zero():
    report = cc.annulus_fixed_point_scan(lambda p: p, 1.0, 2.0, n=40)
    assert report.min_residual == 0.0
    report = cc.annulus_fixed_point_scan(lambda p: (0.0, 0.0), 1.0, 2.0, n=40)
    assert report.min_residual == pytest.approx(1.0, abs=1e-12)
    assert report.argmin_polar[0] == pytest.approx(1.0)
    with pytest.raises(DomainError):
        cc.annulus_fixed_point_scan(lambda p: p, 2.0, 1.0)


def test_usc_probe_trivial_and_segment():
    T = cc.polar_jump_operator(1.0)
    # constant sequence at a continuity point
    assert cc.usc_sequence_probe(T, [(0.5, 0.5)] * 3, [(0.0, 0.0)] * 3)
    # approach the diagonal circle point from below with limits on the
    # segment to (0, 1): the limit lands inside the triangle
    angles = np.pi / 4 - 0.2 / np.arange(1, 6)
    xs = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    ys = np.tile([0.0, 0.5], (5, 1))
    assert cc.usc_sequence_probe(T, xs, ys)
    # identity: the limit equals x
    assert cc.usc_sequence_probe(lambda p: p, [(0.3, 0.3)] * 2,
                                 [(0.3, 0.3)] * 2)


def test_usc_probe_rejects_outside_point():
    T = cc.polar_jump_operator(1.0)
    xs = [(0.5, 0.5)] * 2
    ys = [(0.4, 0.4)] * 2  # not in the singleton envelope {(0,0)}
    assert not cc.usc_sequence_probe(T, xs, ys)
