"""Synthetic geometries for tests and experiments.

Builders return exact, self-consistent distance sets constructed from
explicit marker coordinates, so every derived quantity has a known ground
truth.  Unit-scale coordinates keep floating-point noise far below the
tolerances used in the test suite.
"""

from __future__ import annotations

import math

import numpy as np

from .distances import DistanceSet, squared_distance_table


def distance_set_from_points(points: np.ndarray) -> DistanceSet:
    """DistanceSet of five explicit marker points (order P1..P5)."""
    t = squared_distance_table(np.asarray(points, dtype=float))
    return DistanceSet(t[0, 1], t[0, 2], t[0, 3], t[1, 2],
                       t[1, 3], t[2, 3], t[2, 4], t[3, 4])


def spherical_points(d12=1.0, d14=1.2, d35=0.9, tilt=0.5) -> np.ndarray:
    """Axes meeting at the base: P3 coincides with P1.

    The second axis leaves the origin at `tilt` radians from z; the end
    effector sits d35 from the origin on its circle about that axis.
    """
    u = np.array([math.sin(tilt), 0.0, math.cos(tilt)])
    p3 = np.zeros(3)
    p4 = d14 * u
    w = np.array([math.cos(tilt), 0.0, -math.sin(tilt)])
    phase = 0.7  # generic circle phase, away from symmetry planes
    radial = math.cos(phase) * w + math.sin(phase) * np.array([0.0, 1.0, 0.0])
    p5 = d35 * (math.cos(0.4) * u + math.sin(0.4) * radial)
    p5 *= d35 / np.linalg.norm(p5)
    return np.stack([np.zeros(3), [0.0, 0.0, d12], p3, p4, p5])


def puma_points(d12=2.0, d45=1.0, arm=1.5) -> np.ndarray:
    """Axes meeting above the base: P4 coincides with P2, axes perpendicular."""
    p2 = np.array([0.0, 0.0, d12])
    p3 = np.array([arm, 0.0, d12])
    p4 = p2.copy()
    u = (p4 - p3) / np.linalg.norm(p4 - p3)
    w = np.array([0.0, math.cos(0.3), math.sin(0.3)])
    p5 = p4 + d45 * w - 0.0 * u
    return np.stack([np.zeros(3), p2, p3, p4, p5])


def scara_points(d12=1.0, axis_x=1.3, axis_base_z=0.8, d34=0.6,
                 reach=1.1, z5=0.5, phase=0.9) -> np.ndarray:
    """Axes exactly parallel; the end effector sweeps the plane z = z5."""
    p3 = np.array([axis_x, 0.0, axis_base_z])
    p4 = np.array([axis_x, 0.0, axis_base_z + d34])
    p5 = p3 + np.array([reach * math.cos(phase), reach * math.sin(phase),
                        z5 - axis_base_z])
    return np.stack([np.zeros(3), [0.0, 0.0, d12], p3, p4, p5])


def torus_points(d12=1.0, ring_radius=2.0, tube_radius=0.7,
                 height=1.2, d34=0.5, phase=0.6) -> np.ndarray:
    """Perpendicular skew axes producing an exact circular-meridian torus.

    The second axis is horizontal (direction +y) through (ring_radius, 0,
    height), and the end-effector circle is centered on the common-normal
    foot, so its plane contains the first axis and the swept surface is the
    classic torus with meridian circle ((rho - ring_radius)^2 +
    (z - height)^2 = tube_radius^2).
    """
    u = np.array([0.0, 1.0, 0.0])
    foot = np.array([ring_radius, 0.0, height])
    p3 = foot - (d34 / 2.0) * u
    p4 = foot + (d34 / 2.0) * u
    p5 = foot + tube_radius * np.array([math.cos(phase), 0.0, math.sin(phase)])
    return np.stack([np.zeros(3), [0.0, 0.0, d12], p3, p4, p5])


def skew_points(d12=1.0, offset=0.9, height=1.1, angle=0.8,
                d34=0.5, tube=0.8, foot_shift=0.3, phase=0.5) -> np.ndarray:
    """Generic skew axes (no special alignment); general articulated case."""
    u = np.array([0.0, math.sin(angle), math.cos(angle)])
    cn_foot = np.array([offset, 0.0, height])
    p3 = cn_foot - (d34 / 2.0) * u
    p4 = cn_foot + (d34 / 2.0) * u
    w1 = np.array([0.0, 0.0, 1.0]) - u[2] * u
    w1 /= np.linalg.norm(w1)
    w2 = np.cross(u, w1)
    center = cn_foot + foot_shift * u
    p5 = center + tube * (math.cos(phase) * w1 + math.sin(phase) * w2)
    return np.stack([np.zeros(3), [0.0, 0.0, d12], p3, p4, p5])


def random_marker_points(rng: np.random.Generator, spread=1.0,
                         min_axis=0.25, min_tube=0.15) -> np.ndarray:
    """Five generic points with healthy axis baselines and tube radius."""
    while True:
        pts = rng.uniform(-spread, spread, size=(5, 3))
        pts[0] = 0.0
        pts[1] = np.array([0.0, 0.0, abs(pts[1, 2]) + min_axis])
        axis = pts[3] - pts[2]
        d34 = np.linalg.norm(axis)
        if d34 < min_axis:
            continue
        u = axis / d34
        v = pts[4] - pts[2]
        tube = np.linalg.norm(v - (v @ u) * u)
        if tube < min_tube:
            continue
        return pts


def random_distance_set(rng: np.random.Generator, **kwargs) -> DistanceSet:
    """Random embeddable distance set (from `random_marker_points`)."""
    return distance_set_from_points(random_marker_points(rng, **kwargs))
