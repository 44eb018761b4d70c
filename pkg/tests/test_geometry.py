import math

import numpy as np
import pytest
from scipy import integrate

from hyperc.geometry import (
    INF,
    Geodesic,
    GeodesicFrame,
    HPoint,
    Isometry,
    ORIGIN,
    ball_metrics,
    disk_angle_from_ideal,
    disk_dist,
    dist,
    dist_arrays,
    dist_to_frame,
    dist_to_geodesic,
    frame_point,
    from_disk,
    ideal_from_disk_angle,
    offset_point,
    polar_around_origin,
    reflect,
    reflection_in,
    segment_point_distance,
    to_disk,
    to_hyperboloid,
)

RNG = np.random.default_rng(20240811)


def random_point(rng=RNG, scale=3.0):
    return HPoint(float(rng.normal(0.0, scale)), float(rng.uniform(0.05, 6.0)))


def random_isometry(rng=RNG):
    while True:
        a, b, c, d = rng.normal(size=4)
        if abs(a * d - b * c) > 1e-3:
            return Isometry(a, b, c, d)


class TestDist:
    def test_identity(self):
        p = HPoint(0.0, 1.0)
        assert dist(p, p) == 0.0

    @pytest.mark.parametrize("t", [1.0, 2.5])
    def test_vertical_arclength(self, t):
        # the curve (0, e^t) is the unit-speed parameterization of the axis
        assert dist(HPoint(0, 1), HPoint(0, math.exp(t))) == pytest.approx(t, abs=1e-12)

    def test_against_length_integral(self):
        # independent oracle: integrate the metric |ds|/y along the
        # connecting semicircle (center 0, radius sqrt 2, theta in
        # [pi/4, 3pi/4], where ds = sqrt(2) dtheta and y = sqrt(2) sin theta)
        oracle, _ = integrate.quad(lambda th: 1.0 / math.sin(th), math.pi / 4, 3 * math.pi / 4)
        d = dist(HPoint(1, 1), HPoint(-1, 1))
        assert d == pytest.approx(oracle, abs=1e-10)
        assert d == pytest.approx(1.762747174039086, abs=1e-12)  # arccosh(3)

    def test_metric_properties(self):
        for _ in range(200):
            p, q, r = (random_point() for _ in range(3))
            assert dist(p, q) == dist(q, p)
            assert dist(p, q) >= 0.0
            assert dist(p, r) <= dist(p, q) + dist(q, r) + 1e-10

    def test_near_coincident_guard(self):
        p = HPoint(0.0, 1.0)
        q = HPoint(1e-9, 1.0)
        d = dist(p, q)
        assert 0.0 < d < 2e-9
        assert d == pytest.approx(1e-9, rel=1e-4)

    def test_array_version_matches(self):
        zs = np.asarray([random_point().as_complex() for _ in range(64)])
        ws = np.asarray([random_point().as_complex() for _ in range(64)])
        d = dist_arrays(zs, ws)
        for k in range(64):
            ref = dist(HPoint(zs[k].real, zs[k].imag), HPoint(ws[k].real, ws[k].imag))
            assert d[k] == pytest.approx(ref, abs=1e-12)


class TestFrames:
    def test_canonical_axis_points(self):
        f = GeodesicFrame.canonical_axis()
        assert f.point(0.0) == HPoint(0.0, 1.0)
        p = f.point(1.0)
        assert p.x == pytest.approx(0.0, abs=1e-15)
        assert p.y == pytest.approx(math.e, abs=1e-12)

    def test_isometric_embedding(self):
        for _ in range(50):
            g = Geodesic(float(RNG.normal(0, 3)), float(RNG.normal(0, 3) + 7.0))
            f = GeodesicFrame.canonical(g)
            s, t = RNG.uniform(-4, 4, 2)
            assert dist(f.point(s), f.point(t)) == pytest.approx(abs(s - t), abs=1e-10)

    def test_distance_three_apart(self):
        f = GeodesicFrame.canonical(Geodesic(-2.0, INF))
        assert dist(f.point(-1.0), f.point(2.0)) == pytest.approx(3.0, abs=1e-10)

    def test_off_geodesic_origin_rejected(self):
        with pytest.raises(ValueError):
            GeodesicFrame(Geodesic(0.0, INF), HPoint(1.0, 1.0))


class TestDistToGeodesic:
    def test_point_on_geodesic(self):
        d, foot = dist_to_geodesic(HPoint(0.0, 2.5), Geodesic(0.0, INF))
        assert d == pytest.approx(0.0, abs=1e-12)
        assert foot == pytest.approx(math.log(2.5), abs=1e-12)

    @pytest.mark.parametrize("theta", [0.3, 0.7, 1.2, math.pi / 2])
    def test_log_tan_half_formula(self, theta):
        p = HPoint(math.cos(theta), math.sin(theta))
        d, foot = dist_to_geodesic(p, Geodesic(0.0, INF))
        assert d == pytest.approx(abs(math.log(math.tan(theta / 2.0))), abs=1e-12)
        assert foot == pytest.approx(0.0, abs=1e-12)


class TestOffsetPoint:
    def test_zero_offset_is_frame_point(self):
        f = GeodesicFrame.canonical_axis()
        assert dist(offset_point(f, 0.0, 0.0), frame_point(f, 0.0)) < 1e-12

    def test_pythagoras_value(self):
        f = GeodesicFrame.canonical_axis()
        p = offset_point(f, 1.0, 1.0)
        # cosh d = cosh 1 cosh 1
        assert dist(f.point(0.0), p) == pytest.approx(1.513374006596504, abs=1e-10)

    def test_pythagoras_identity_random(self):
        for _ in range(50):
            g = Geodesic(float(RNG.normal(0, 2)), float(RNG.normal(0, 2) + 5.0))
            f = GeodesicFrame.canonical(g)
            s, y = RNG.uniform(-2, 2, 2)
            p = offset_point(f, s, y)
            lhs = math.cosh(dist(f.point(0.0), p))
            assert lhs == pytest.approx(math.cosh(s) * math.cosh(y), rel=1e-10)

    def test_roundtrip_through_dist_to_frame(self):
        for _ in range(50):
            g = Geodesic(float(RNG.normal(0, 2)), float(RNG.normal(0, 2) + 4.0))
            direction = 1 if RNG.uniform() < 0.5 else -1
            f = GeodesicFrame(g, GeodesicFrame.canonical(g).origin, direction)
            s, y = RNG.uniform(-2.5, 2.5, 2)
            yoff, foot = dist_to_frame(offset_point(f, s, y), f)
            assert yoff == pytest.approx(y, abs=1e-8)
            assert foot == pytest.approx(s, abs=1e-8)

    def test_perpendicular_offset(self):
        f = GeodesicFrame.canonical_axis()
        p = offset_point(f, 0.0, 0.75)
        assert dist(f.point(0.0), p) == pytest.approx(0.75, abs=1e-10)


class TestIsometries:
    def test_identity(self):
        p = random_point()
        assert Isometry.identity().apply(p) == p

    def test_scaling_is_translation(self):
        m = Isometry(2.0, 0.0, 0.0, 1.0)
        assert m.apply(HPoint(0, 1)) == HPoint(0.0, 2.0)
        d1 = dist(HPoint(0, 1), HPoint(0, 2))
        d2 = dist(m.apply(HPoint(0, 1)), m.apply(HPoint(0, 2)))
        assert d1 == pytest.approx(d2, abs=1e-12)

    def test_random_isometries_preserve_dist(self):
        for _ in range(100):
            m = random_isometry()
            p, q = random_point(), random_point()
            assert dist(m.apply(p), m.apply(q)) == pytest.approx(dist(p, q), abs=1e-10)

    def test_geodesic_boundary_action(self):
        m = Isometry(2.0, 1.0, 0.0, 1.0)
        g = Geodesic(0.0, 1.0)
        img = m.apply_geodesic(g)
        assert img == Geodesic(1.0, 3.0)

    def test_singular_rejected(self):
        with pytest.raises(ValueError):
            Isometry(1.0, 2.0, 2.0, 4.0)

    def test_composition_matches_sequential(self):
        m1, m2 = random_isometry(), random_isometry()
        p = random_point()
        combined = (m1 @ m2).apply(p)
        sequential = m1.apply(m2.apply(p))
        assert dist(combined, sequential) < 1e-10

    def test_inverse(self):
        m = random_isometry()
        p = random_point()
        assert dist(m.inverse().apply(m.apply(p)), p) < 1e-10


class TestReflection:
    def test_fixes_points_on_line(self):
        g = Geodesic(-1.0, 3.0)
        f = GeodesicFrame.canonical(g)
        p = f.point(0.7)
        assert dist(reflect(g, p), p) < 1e-10

    def test_vertical_mirror(self):
        assert reflect(Geodesic(0.0, INF), HPoint(1, 1)) == HPoint(-1.0, 1.0)

    def test_involution_and_isometry(self):
        for _ in range(50):
            g = Geodesic(float(RNG.normal(0, 2)), float(RNG.normal(0, 2) + 3.0))
            p, q = random_point(), random_point()
            assert dist(reflect(g, reflect(g, p)), p) < 1e-10
            assert dist(reflect(g, p), reflect(g, q)) == pytest.approx(dist(p, q), abs=1e-10)

    def test_reflection_has_negative_determinant(self):
        assert reflection_in(Geodesic(-1.0, 3.0)).det < 0


class TestDiskModel:
    def test_center_convention(self):
        assert to_disk(HPoint(0, 1)) == (0.0, 0.0)

    def test_roundtrip(self):
        for _ in range(1000):
            p = random_point()
            back = from_disk(to_disk(p))
            assert dist(back, p) < 1e-12

    def test_distance_agreement(self):
        for _ in range(100):
            p, q = random_point(), random_point()
            wd = disk_dist(complex(*to_disk(p)), complex(*to_disk(q)))
            assert wd == pytest.approx(dist(p, q), abs=1e-10)

    def test_rejects_outside_disk(self):
        with pytest.raises(ValueError):
            from_disk((1.0, 0.0))

    def test_boundary_maps_roundtrip(self):
        for theta in (0.3, 1.0, math.pi, 4.0, 6.0):
            x = ideal_from_disk_angle(theta)
            assert disk_angle_from_ideal(x) == pytest.approx(theta, abs=1e-12)
        assert ideal_from_disk_angle(0.0) == INF
        assert disk_angle_from_ideal(INF) == 0.0


class TestBallMetrics:
    def test_degenerate(self):
        assert ball_metrics(0.0) == (0.0, 0.0)

    def test_unit_ball(self):
        area, circ = ball_metrics(1.0)
        assert area == pytest.approx(3.412276265284902, abs=1e-12)
        assert circ == pytest.approx(7.384006872882645, abs=1e-12)

    def test_area_derivative_is_circumference(self):
        h = 1e-6
        for r in (0.5, 1.0, 2.0, 3.0):
            a_plus, _ = ball_metrics(r + h)
            a_minus, _ = ball_metrics(r - h)
            _, circ = ball_metrics(r)
            assert (a_plus - a_minus) / (2 * h) == pytest.approx(circ, rel=1e-8)

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            ball_metrics(-0.1)


class TestGeodesicType:
    def test_unordered_normalization(self):
        assert Geodesic(3.0, -1.0) == Geodesic(-1.0, 3.0)
        assert Geodesic(INF, 2.0) == Geodesic(2.0, INF)

    def test_distinct_endpoints_required(self):
        with pytest.raises(ValueError):
            Geodesic(1.0, 1.0)

    def test_through_two_points(self):
        p, q = HPoint(-1.0, 1.0), HPoint(1.0, 1.0)
        g = Geodesic.through(p, q)
        assert dist_to_geodesic(p, g)[0] < 1e-12
        assert dist_to_geodesic(q, g)[0] < 1e-12

    def test_through_vertical(self):
        g = Geodesic.through(HPoint(2.0, 1.0), HPoint(2.0, 3.0))
        assert g == Geodesic(2.0, INF)


class TestHyperboloid:
    def test_segment_distance_matches_reference(self):
        rng = np.random.default_rng(5)
        pts = rng.normal(size=40) + 1j * rng.uniform(0.2, 8.0, 40)
        p = to_hyperboloid(np.asarray([1j]))
        q = to_hyperboloid(np.asarray([1j * math.exp(2.5)]))
        d, foot, perp = segment_point_distance(p, q, to_hyperboloid(pts))
        from hyperc.percolation import _distance_to_axis_segment

        d_ref, u_ref, y_ref = _distance_to_axis_segment(pts, 2.5)
        assert np.abs(d[0] - d_ref).max() < 1e-10
        assert np.abs(foot[0] - u_ref).max() < 1e-10
        assert np.abs(perp[0] - np.abs(y_ref)).max() < 1e-10

    def test_polar_points_at_right_distance(self):
        t = np.asarray([0.5, 1.0, 2.0])
        phi = np.asarray([0.0, 1.0, 4.0])
        z = polar_around_origin(t, phi)
        for k in range(3):
            assert dist(ORIGIN, HPoint(z[k].real, z[k].imag)) == pytest.approx(t[k], abs=1e-12)
