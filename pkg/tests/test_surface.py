import math

import numpy as np
import pytest

from ws2r.datasets import bundled_set
from ws2r.distances import DistanceSet, embed, project_to_consistency
from ws2r.errors import IllConditioned, NotEmbeddable
from ws2r.kinematics import JointLimits, sweep
from ws2r.surface import (
    Topology,
    canonical_reduce,
    classify,
    extract_coefficients,
    surface_residual,
    surface_residual_many,
)
from ws2r.synthetic import (
    distance_set_from_points,
    puma_points,
    random_marker_points,
    scara_points,
    skew_points,
    spherical_points,
    torus_points,
)


def spherical_constraint_set(d35=0.9):
    return distance_set_from_points(spherical_points(d35=d35))


class TestSurfaceResidual:
    def test_spherical_on_surface_point(self):
        ds = spherical_constraint_set(d35=0.9)
        assert abs(surface_residual(ds, [0.9, 0.0, 0.0])) <= 1e-9

    def test_puma_north_pole(self):
        ds = distance_set_from_points(puma_points(d12=2.0, d45=1.0))
        assert ds.s24 == pytest.approx(0.0, abs=1e-15)
        assert ds.s14 == pytest.approx(ds.s12)
        assert ds.s34 == pytest.approx(ds.s23)
        assert ds.s13 == pytest.approx(ds.s12 + ds.s23)
        assert abs(surface_residual(ds, [0.0, 0.0, 3.0])) <= 1e-9

    def test_sweep_points_lie_on_surface(self, rng):
        ds = distance_set_from_points(random_marker_points(rng))
        cloud = sweep(embed(ds), JointLimits(0, 300, 10, 200, 10.0), decimation=1)
        assert cloud.max_residual <= 1e-9

    def test_origin_falls_back_to_plain_determinant(self):
        ds = spherical_constraint_set()
        value = surface_residual(ds, [0.0, 0.0, 0.0])
        assert np.isfinite(value)

    def test_rejects_non_embeddable_set(self):
        ds = DistanceSet.from_distances(1.0, 3.0, 1.2, 1.0, 1.1, 0.8, 0.9, 0.9)
        with pytest.raises(NotEmbeddable):
            surface_residual(ds, [0.1, 0.2, 0.3])

    def test_axisymmetry(self, rng):
        ds = distance_set_from_points(random_marker_points(rng))
        p = rng.uniform(-1.0, 1.0, size=3)
        base = surface_residual(ds, p)
        for angle in rng.uniform(0.0, 2 * math.pi, size=8):
            c, s = math.cos(angle), math.sin(angle)
            q = [c * p[0] - s * p[1], s * p[0] + c * p[1], p[2]]
            assert surface_residual(ds, q) == pytest.approx(base, rel=1e-12, abs=1e-15)


class TestExtractCoefficients:
    def test_spherical_structure_is_squared_sphere(self):
        # Under the exact meet-at-base constraints the quartic collapses to
        # the square of the sphere equation: coefficients proportional to
        # (1, 0, -2*s35, -2*s35, 0, s35^2) in the monomial basis.
        ds = spherical_constraint_set(d35=0.9)
        qc = extract_coefficients(ds)
        arr = qc.as_array()
        scale = qc.radial4
        assert abs(scale) > 0
        assert qc.radial2_axial == pytest.approx(0.0, abs=1e-9 * abs(scale))
        assert qc.axial == pytest.approx(0.0, abs=1e-9 * abs(scale))
        assert qc.planar == pytest.approx(qc.axial2, rel=1e-9)
        assert qc.planar / scale == pytest.approx(-2.0 * ds.s35, rel=1e-9)
        assert qc.constant / scale == pytest.approx(ds.s35 ** 2, rel=1e-9)

    def test_puma_structure_is_squared_sphere(self):
        ds = distance_set_from_points(puma_points(d12=2.0, d45=1.0))
        qc = extract_coefficients(ds)
        # (x^2+y^2+(z-d12)^2 - s45)^2 = (r2 - 2*d12*z + k)^2 with k = s12-s45,
        # expanded in the basis, up to a common scale.
        c = qc.radial4
        k = ds.s12 - ds.s45
        assert qc.radial2_axial / c == pytest.approx(-4.0, rel=1e-9)
        assert qc.planar / c == pytest.approx(2.0 * k, rel=1e-9)
        assert qc.axial2 / c == pytest.approx(2.0 * k + 4.0 * ds.s12, rel=1e-9)
        assert qc.axial / c == pytest.approx(-4.0 * k, rel=1e-9)
        assert qc.constant / c == pytest.approx(k * k, rel=1e-9)

    def test_random_set_held_out_residual(self, rng):
        for _ in range(10):
            ds = distance_set_from_points(random_marker_points(rng))
            qc = extract_coefficients(ds)
            assert qc.held_out_residual <= 1e-8

    def test_coefficient_evaluation_matches_determinant(self, rng):
        ds = distance_set_from_points(random_marker_points(rng))
        qc = extract_coefficients(ds)
        pts = rng.uniform(-1.5, 1.5, size=(100, 3))
        via_coeffs = qc.evaluate_scaled(pts)
        via_det = surface_residual_many(ds, pts)
        np.testing.assert_allclose(via_coeffs, via_det, rtol=1e-8, atol=1e-12)

    def test_normalization_convention(self, rng):
        ds = distance_set_from_points(random_marker_points(rng))
        qc = extract_coefficients(ds)
        degrees = np.array([4, 4, 2, 2, 2, 0], dtype=float)
        scaled = np.abs(qc.as_array()) * qc.length_scale ** degrees
        assert np.max(scaled) == pytest.approx(1.0, rel=1e-12)

    def test_ill_conditioned_when_first_axis_collapses(self):
        pts = spherical_points(d12=1.0)
        pts[1] = [0.0, 0.0, 1e-14]  # P2 almost on P1: z-basis terms vanish
        ds = distance_set_from_points(pts)
        with pytest.raises(IllConditioned):
            extract_coefficients(ds)


class TestClassify:
    def test_exact_parallel_axes_any_tau(self):
        pts = np.array([[0, 0, 0], [0, 0, 1], [1, 0, 0], [1, 0, 1], [1.5, 0.5, 0.3]],
                       dtype=float)
        ds = distance_set_from_points(pts)
        for tau in (0.001, 0.05, 0.5):
            assert classify(embed(ds), tau).category is Topology.SCARA

    def test_bundled_config_a_general(self):
        ds, _ = bundled_set("fig5_a")
        emb, _, _ = project_to_consistency(ds)
        assert classify(emb, 0.05).category is Topology.GENERAL_ARTICULATED

    def test_synthetic_categories(self):
        cases = [
            (spherical_points(), Topology.SPHERICAL),
            (puma_points(), Topology.PUMA_LIKE),
            (scara_points(), Topology.SCARA),
            (torus_points(), Topology.GENERAL_ARTICULATED),
            (skew_points(), Topology.GENERAL_ARTICULATED),
        ]
        for pts, expected in cases:
            ds = distance_set_from_points(pts)
            assert classify(embed(ds), 0.05).category is expected

    def test_canonical_parameters(self):
        ds = distance_set_from_points(spherical_points(d35=0.9))
        tc = classify(embed(ds), 0.05)
        assert tc.radius == pytest.approx(0.9, rel=1e-12)

        ds = distance_set_from_points(puma_points(d12=2.0, d45=1.0))
        tc = classify(embed(ds), 0.05)
        assert tc.center_height == pytest.approx(2.0, rel=1e-12)
        assert tc.radius == pytest.approx(1.0, rel=1e-12)

        ds = distance_set_from_points(scara_points(z5=0.5))
        tc = classify(embed(ds), 0.05)
        assert tc.plane_height == pytest.approx(0.5, rel=1e-9)

    def test_torus_parameters(self):
        ds = distance_set_from_points(
            torus_points(ring_radius=2.0, tube_radius=0.7, height=1.2))
        tc = classify(embed(ds), 0.05)
        assert tc.category is Topology.GENERAL_ARTICULATED
        assert tc.common_normal == pytest.approx(2.0, rel=1e-9)
        assert tc.axis_angle == pytest.approx(math.pi / 2.0, rel=1e-9)
        assert tc.foot_height == pytest.approx(1.2, rel=1e-9)
        assert tc.tube_radius == pytest.approx(0.7, rel=1e-9)
        assert abs(tc.tube_offset) <= 1e-9
        assert not tc.degenerate_tube

    def test_degenerate_tube_flag(self):
        ds = distance_set_from_points(
            skew_points(tube=0.01, offset=0.9, height=1.1))
        tc = classify(embed(ds), 0.05)
        assert tc.category is Topology.GENERAL_ARTICULATED
        assert tc.degenerate_tube

    def test_tau_validation(self, rng):
        ds = distance_set_from_points(random_marker_points(rng))
        with pytest.raises(ValueError):
            classify(embed(ds), 0.0)

    def test_category_invariant_under_rigid_motion(self, rng):
        from conftest import random_rotation

        for _ in range(5):
            pts = random_marker_points(rng)
            ds = distance_set_from_points(pts)
            base = classify(embed(ds), 0.05).category
            moved = pts @ random_rotation(rng).T + rng.uniform(-5, 5, size=3)
            assert classify(embed(distance_set_from_points(moved)), 0.05).category is base

    def test_category_invariant_under_uniform_scaling(self, rng):
        for _ in range(5):
            pts = random_marker_points(rng)
            base = classify(embed(distance_set_from_points(pts)), 0.05).category
            scaled = classify(embed(distance_set_from_points(pts * 730.0)), 0.05).category
            assert scaled is base


class TestCanonicalReduce:
    def test_spherical_value(self):
        ds = distance_set_from_points(spherical_points(d35=0.9))
        surf = canonical_reduce(classify(embed(ds), 0.05))
        assert surf.residual([[0.9, 0.0, 0.0]])[0] == pytest.approx(0.0, abs=1e-12)

    def test_spherical_reference_scale(self):
        # 455 mm radius: the shared tube dimension of the reference robot.
        pts = spherical_points(d12=58.0, d14=420.0, d35=455.0, tilt=0.4)
        ds = distance_set_from_points(pts)
        surf = canonical_reduce(classify(embed(ds), 0.05))
        assert surf.residual([[0.0, 0.0, 455.0]])[0] == pytest.approx(0.0, abs=1e-9)

    def test_scara_plane_value(self):
        ds = distance_set_from_points(
            scara_points(d12=60.0, axis_x=120.0, axis_base_z=80.0, d34=50.0,
                         reach=110.0, z5=100.0))
        surf = canonical_reduce(classify(embed(ds), 0.05))
        assert surf.residual([[7.0, -3.0, 100.0]])[0] == pytest.approx(0.0, abs=1e-12)

    def test_general_generator_lies_on_original_surface(self):
        ds = distance_set_from_points(skew_points())
        emb = embed(ds)
        surf = canonical_reduce(classify(emb, 0.05))
        gen = surf.generator_points(100)
        assert np.max(np.abs(surface_residual_many(ds, gen))) <= 1e-9

    def test_general_samples_lie_on_original_surface(self):
        ds = distance_set_from_points(torus_points())
        surf = canonical_reduce(classify(embed(ds), 0.05))
        pts = surf.sample(200, seed=3)
        assert np.max(np.abs(surface_residual_many(ds, pts))) <= 1e-9

    def test_canonical_zero_sets_match_quartic(self):
        # For constraint-exact sets the canonical surface is the zero set.
        for pts in (spherical_points(), puma_points(), scara_points()):
            ds = distance_set_from_points(pts)
            surf = canonical_reduce(classify(embed(ds), 0.05))
            samples = surf.sample(100, seed=11)
            assert np.max(np.abs(surface_residual_many(ds, samples))) <= 1e-9

    def test_generator_rejected_for_special_cases(self):
        ds = distance_set_from_points(scara_points())
        surf = canonical_reduce(classify(embed(ds), 0.05))
        with pytest.raises(ValueError):
            surf.generator_points()
