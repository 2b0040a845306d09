import math

import numpy as np
import pytest

from ws2r.datasets import bundled_set
from ws2r.distances import (
    DistanceSet,
    cm_det_3,
    cm_det_4,
    cm_det_5,
    cm_det_block,
    cm_residual,
    embed,
    is_embeddable,
    project_to_consistency,
    squared_distance_table,
)
from ws2r.errors import DegenerateAxis2, DegenerateFrame, NotEmbeddable
from ws2r.synthetic import (
    distance_set_from_points,
    random_marker_points,
    spherical_points,
)

from conftest import bordered_matrix, det_by_cofactor

# Regular tetrahedron with rational coordinates (side sqrt(2)).
RATIONAL_TETRA = np.array([
    [0.0, 0.0, 0.0],
    [1.0, 1.0, 0.0],
    [1.0, 0.0, 1.0],
    [0.0, 1.0, 1.0],
])


class TestCmDet5:
    def test_zero_for_tetra_plus_edge_midpoint(self):
        p5 = (RATIONAL_TETRA[0] + RATIONAL_TETRA[1]) / 2.0
        table = squared_distance_table(np.vstack([RATIONAL_TETRA, p5]))
        assert abs(cm_det_5(table)) <= 1e-12

    def test_matches_cofactor_expansion_on_random_table(self):
        rng = np.random.default_rng(42)
        pts = rng.uniform(0.0, 1.0, size=(5, 3))
        table = squared_distance_table(pts)
        expected = -det_by_cofactor(bordered_matrix(table)) / 16.0
        assert cm_det_5(table) == pytest.approx(expected, abs=1e-14)

    def test_zero_for_explicit_embedding(self):
        pts = np.array([[0, 0, 0], [0, 0, 1], [1, 0, 0], [1, 0, 1], [0, 1, 0]], dtype=float)
        table = squared_distance_table(pts)
        assert abs(cm_det_5(table)) <= 1e-12

    def test_nonzero_in_four_space(self):
        rng = np.random.default_rng(7)
        table = squared_distance_table(rng.uniform(0.0, 1.0, size=(5, 4)))
        assert abs(cm_det_5(table)) > 1e-8


class TestCmDetBlock:
    def test_zero_on_three_space_table(self):
        rng = np.random.default_rng(1)
        pts = rng.uniform(0.0, 1.0, size=(5, 3))
        table = squared_distance_table(pts)
        scale6 = np.max(table) ** 3
        assert abs(cm_det_block(table)) <= 1e-9 * scale6

    def test_matches_plain_determinant_off_surface(self):
        rng = np.random.default_rng(2)
        pts = rng.uniform(0.0, 1.0, size=(5, 4))
        table = squared_distance_table(pts)
        v_block = cm_det_block(table)
        v_plain = cm_det_5(table)
        assert abs(v_plain) > 1e-8
        assert v_block == pytest.approx(v_plain, rel=1e-9)

    def test_degenerate_frame_when_s15_zero(self):
        rng = np.random.default_rng(3)
        table = squared_distance_table(rng.uniform(0.0, 1.0, size=(5, 3)))
        table[0, 4] = table[4, 0] = 0.0
        with pytest.raises(DegenerateFrame):
            cm_det_block(table)


class TestLowerOrderDets:
    def test_equilateral_triangle_area(self):
        # value convention: 16 * area^2
        v = cm_det_3(1.0, 1.0, 1.0)
        assert math.sqrt(v / 16.0) == pytest.approx(math.sqrt(3.0) / 4.0, abs=1e-12)

    def test_collinear_triangle_is_zero(self):
        assert cm_det_3(1.0, 4.0, 1.0) == pytest.approx(0.0, abs=1e-12)

    def test_unit_regular_tetrahedron_volume(self):
        table = np.ones((4, 4)) - np.eye(4)
        v = cm_det_4(table)
        # value convention: 288 * volume^2
        assert math.sqrt(v / 288.0) == pytest.approx(1.0 / (6.0 * math.sqrt(2.0)), abs=1e-12)

    def test_coplanar_four_points_zero(self):
        pts = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0]], dtype=float)
        table = squared_distance_table(pts)
        assert cm_det_4(table) == pytest.approx(0.0, abs=1e-12)


class TestCmResult:
    def test_normalized_residual_small_for_embeddings(self, rng):
        for _ in range(20):
            pts = rng.uniform(-1.0, 1.0, size=(5, 3))
            res = cm_residual(squared_distance_table(pts))
            assert abs(res.normalized) <= 1e-9


class TestIsEmbeddable:
    def test_bundled_config_a_is_embeddable(self):
        ds, _ = bundled_set("fig5_a")
        assert is_embeddable(ds)

    def test_triangle_violation_flagged(self):
        ds = DistanceSet.from_distances(1.0, 3.0, 1.2, 1.0, 1.1, 0.8, 0.9, 0.9)
        report = is_embeddable(ds)
        assert not report
        assert report.first_violation == "triangle(1,2,3)"

    def test_negative_tetra_determinant_rejected(self):
        # Unit square with BOTH diagonals stretched: every triangle is fine
        # but no Euclidean realization exists (flexing a quadrilateral trades
        # one diagonal against the other), so the 4-point determinant goes
        # negative and only the tetrahedron check can catch it.
        ds = DistanceSet(s12=1.0, s13=2.1, s14=1.0, s23=1.0, s24=2.1, s34=1.0,
                         s35=1.0, s45=1.0)
        assert cm_det_4(ds.full_table(1.0, 1.0)[:4, :4]) < 0.0
        report = is_embeddable(ds)
        assert not report
        assert report.first_violation == "tetrahedron(1,2,3,4)"

    def test_empty_end_effector_circle_flagged(self):
        ds = DistanceSet.from_distances(1.0, 1.0, 1.4, 1.2, 1.5, 1.0, 3.0, 1.0)
        report = is_embeddable(ds)
        assert not report
        assert report.first_violation == "triangle(3,4,5)"


class TestEmbed:
    def test_spherical_constraint_puts_p3_at_origin(self):
        ds = DistanceSet.from_distances(
            d12=1.0, d13=0.0, d14=1.0, d23=1.0, d24=math.sqrt(2.0),
            d34=1.0, d35=0.8, d45=0.9)
        emb = embed(ds)
        assert np.allclose(emb.p3, emb.p1)
        np.testing.assert_allclose(emb.p2, [0.0, 0.0, 1.0])

    def test_bundled_config_a_round_trip(self):
        ds, _ = bundled_set("fig5_a")
        emb = embed(ds, clamp_rel=1e-3)
        back = emb.distance_set()
        for key, value in ds.as_distance_dict().items():
            assert getattr(back, "s" + key[1:]) == pytest.approx(
                getattr(ds, "s" + key[1:]), rel=1e-6)

    def test_synthetic_round_trip_exact(self, rng):
        for _ in range(25):
            ds = distance_set_from_points(random_marker_points(rng))
            back = embed(ds).distance_set()
            for name in ("s12", "s13", "s14", "s23", "s24", "s34", "s35", "s45"):
                assert getattr(back, name) == pytest.approx(getattr(ds, name), rel=1e-9)

    def test_branch_mirrors_p4(self, rng):
        ds = distance_set_from_points(random_marker_points(rng))
        plus = embed(ds, branch=1)
        minus = embed(ds, branch=-1)
        assert plus.p4[1] == pytest.approx(-minus.p4[1])
        for name in ("s12", "s34", "s35", "s45"):
            assert getattr(plus.distance_set(), name) == pytest.approx(
                getattr(minus.distance_set(), name), rel=1e-9)

    def test_not_embeddable_raises_with_simplex(self):
        ds = DistanceSet.from_distances(1.0, 3.0, 1.2, 1.0, 1.1, 0.8, 0.9, 0.9)
        with pytest.raises(NotEmbeddable) as err:
            embed(ds)
        assert "triangle(1,2,3)" in str(err.value)

    def test_reference_phase_maximizes_z(self, rng):
        # P5's circle phase: no other phase may exceed the reference z.
        ds = distance_set_from_points(random_marker_points(rng))
        emb = embed(ds)
        u = emb.p4 - emb.p3
        u /= np.linalg.norm(u)
        v = emb.p5 - emb.p3
        t5 = float(v @ u)
        r5 = math.sqrt(max(float(v @ v) - t5 * t5, 0.0))
        foot = emb.p3 + t5 * u
        w1 = (emb.p5 - foot) / r5
        w2 = np.cross(u, w1)
        phases = foot[2] + r5 * (np.cos(np.linspace(0, 2 * np.pi, 360)) * w1[2]
                                 + np.sin(np.linspace(0, 2 * np.pi, 360)) * w2[2])
        assert emb.p5[2] >= phases.max() - 1e-9

    def test_degenerate_first_axis(self):
        ds = DistanceSet(0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0)
        with pytest.raises(DegenerateFrame):
            embed(ds)

    def test_degenerate_second_axis(self):
        pts = np.array([[0, 0, 0], [0, 0, 1], [1, 0, 0.5], [1, 0, 0.5], [1, 1, 0]],
                       dtype=float)
        ds = distance_set_from_points(pts)
        with pytest.raises(DegenerateAxis2):
            embed(ds)


class TestProjection:
    def test_exact_set_projects_onto_itself(self, rng):
        ds = distance_set_from_points(random_marker_points(rng))
        _, projected, report = project_to_consistency(ds)
        assert report.max_delta_mm <= 1e-9 * ds.scale
        assert projected.s13 == pytest.approx(ds.s13, rel=1e-12)

    def test_inconsistent_bundled_set_projects_with_small_delta(self):
        ds, _ = bundled_set("fig5_i")
        assert not is_embeddable(ds)  # mm-rounded data breaks the tetrahedron
        _, projected, report = project_to_consistency(ds)
        assert 0.0 < report.max_delta_mm < 2.0
        assert is_embeddable(projected)

    def test_strict_embed_rejects_what_projection_accepts(self):
        ds, _ = bundled_set("fig5_i")
        with pytest.raises(NotEmbeddable):
            embed(ds)  # default strict clamp


class TestSphericalConstraintHelper:
    def test_generator_satisfies_constraints(self):
        pts = spherical_points()
        ds = distance_set_from_points(pts)
        assert ds.s13 == pytest.approx(0.0, abs=1e-15)
        assert ds.s23 == pytest.approx(ds.s12, rel=1e-12)
        assert ds.s34 == pytest.approx(ds.s14, rel=1e-12)
