"""Marker-frame calibration and surface fitting for measured clouds.

Converts labeled motion-capture marker coordinates into distance sets,
normalizes frames into the canonical embedding frame, and fits the three
canonical surface families (sphere, plane, torus of revolution) to
end-effector clouds with orthogonal-distance (total least squares)
residuals, since tracking error is isotropic.

Summations run in fixed input order (numpy reductions), so results are
deterministic for a given cloud ordering.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distances import DistanceSet
from .errors import DegenerateCloud, MissingMarker, NotAxisymmetric


@dataclass(frozen=True, eq=False)
class MarkerFrame:
    """Labeled marker coordinates (mm); P5 (end effector) is optional."""

    p1: np.ndarray
    p2: np.ndarray
    p3: np.ndarray
    p4: np.ndarray
    p5: np.ndarray | None = None
    timestamp: float | None = None

    def __post_init__(self):
        for name in ("p1", "p2", "p3", "p4"):
            value = getattr(self, name)
            if value is None:
                raise MissingMarker(f"marker {name.upper()} is required")
            object.__setattr__(self, name, _finite_vec3(value, name))
        if self.p5 is not None:
            object.__setattr__(self, "p5", _finite_vec3(self.p5, "p5"))


def _finite_vec3(value, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float).reshape(3)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"marker {name.upper()} has non-finite coordinates")
    return arr


def distances_from_markers(frame: MarkerFrame) -> tuple[DistanceSet, dict[str, float]]:
    """Pairwise squared distances of a marker frame.

    Returns the pose-independent DistanceSet plus, when P5 is present, the
    pose-dependent end-effector terms {'s15', 's25'} as diagnostics for
    cross-checking against reference captures.
    """
    if frame.p5 is None:
        raise MissingMarker("marker P5 is required to derive s35/s45")

    def sq(a, b):
        return float(np.sum((a - b) ** 2))

    ds = DistanceSet(
        sq(frame.p1, frame.p2), sq(frame.p1, frame.p3), sq(frame.p1, frame.p4),
        sq(frame.p2, frame.p3), sq(frame.p2, frame.p4), sq(frame.p3, frame.p4),
        sq(frame.p3, frame.p5), sq(frame.p4, frame.p5),
    )
    diagnostics = {"s15": sq(frame.p1, frame.p5), "s25": sq(frame.p2, frame.p5)}
    return ds, diagnostics


def canonical_transform(frame: MarkerFrame) -> tuple[np.ndarray, np.ndarray]:
    """Rigid transform (R, t) mapping P1 to the origin, P2 onto +z, and P3
    into the x >= 0 half of the xz-plane: p_canonical = R @ (p - t).
    """
    t = frame.p1.copy()
    ez = frame.p2 - frame.p1
    nz = np.linalg.norm(ez)
    if nz <= 0:
        raise DegenerateCloud("P1 and P2 coincide; frame axis undefined")
    ez = ez / nz
    ref = frame.p3 - frame.p1
    ex = ref - (ref @ ez) * ez
    nx = np.linalg.norm(ex)
    if nx <= 1e-12 * nz:
        # P3 on the first axis: azimuth is a free gauge, pick any.
        ex = np.array([1.0, 0.0, 0.0]) - ez[0] * ez
        ex = ex / np.linalg.norm(ex)
    else:
        ex = ex / nx
    ey = np.cross(ez, ex)
    r = np.stack([ex, ey, ez])
    return r, t


def apply_transform(r: np.ndarray, t: np.ndarray, points: np.ndarray) -> np.ndarray:
    return (np.atleast_2d(points) - t) @ r.T


@dataclass(frozen=True)
class FitReport:
    """Result of a canonical-surface fit on a point cloud."""

    kind: str
    params: dict[str, float]
    rms: float
    max_residual: float
    inlier_fraction: float


def _report(kind: str, params: dict, residuals: np.ndarray) -> FitReport:
    rms = float(np.sqrt(np.mean(residuals ** 2)))
    max_res = float(np.max(np.abs(residuals)))
    # Inliers within 3x RMS; an (almost) exact fit counts everything in.
    band = 3.0 * max(rms, 1e-12)
    inliers = float(np.mean(np.abs(residuals) <= band))
    return FitReport(kind, params, rms, max_res, inliers)


def fit_sphere(points: np.ndarray) -> FitReport:
    """Least-squares sphere: algebraic solve plus one Gauss-Newton pass.

    Needs at least 4 non-coplanar points; residuals are signed radial
    distances |p - c| - r.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[0] < 4:
        raise DegenerateCloud("sphere fit needs >= 4 points")
    centered = pts - pts.mean(axis=0)
    svals = np.linalg.svd(centered, compute_uv=False)
    if svals[-1] <= 1e-9 * max(svals[0], 1.0):
        raise DegenerateCloud("sphere fit needs non-coplanar points")

    design = np.column_stack([2.0 * pts, np.ones(len(pts))])
    rhs = np.sum(pts * pts, axis=1)
    sol, *_ = np.linalg.lstsq(design, rhs, rcond=None)
    center = sol[:3]
    radius = math.sqrt(max(sol[3] + float(center @ center), 0.0))

    # One Gauss-Newton step on the geometric residuals.
    diff = pts - center
    dist = np.linalg.norm(diff, axis=1)
    dist = np.maximum(dist, 1e-30)
    jac = np.column_stack([-diff / dist[:, None], -np.ones(len(pts))])
    res = dist - radius
    step, *_ = np.linalg.lstsq(jac, -res, rcond=None)
    center = center + step[:3]
    radius = radius + step[3]

    residuals = np.linalg.norm(pts - center, axis=1) - radius
    params = {"cx": center[0], "cy": center[1], "cz": center[2], "radius": radius}
    return _report("sphere", params, residuals)


def fit_plane(points: np.ndarray, horizontal_tilt_limit: float = math.radians(10.0)) -> FitReport:
    """Total-least-squares plane via the smallest covariance direction.

    Reports the tilt from horizontal and, when the plane is within
    `horizontal_tilt_limit` of horizontal, its height z5 at the centroid.
    Residuals are orthogonal distances.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[0] < 3:
        raise DegenerateCloud("plane fit needs >= 3 points")
    centroid = pts.mean(axis=0)
    centered = pts - centroid
    _, svals, vt = np.linalg.svd(centered, full_matrices=False)
    if svals[1] <= 1e-9 * max(svals[0], 1.0):
        raise DegenerateCloud("plane fit needs non-collinear points")
    normal = vt[-1]
    if normal[2] < 0:
        normal = -normal
    tilt = math.atan2(float(np.hypot(normal[0], normal[1])), abs(float(normal[2])))
    residuals = centered @ normal
    params = {
        "nx": normal[0], "ny": normal[1], "nz": normal[2],
        "tilt": tilt,
        "offset": float(normal @ centroid),
    }
    if tilt <= horizontal_tilt_limit:
        params["z5"] = float(centroid[2])
    return _report("plane", params, residuals)


def fit_torus_of_revolution(points: np.ndarray, azimuth_bins: int = 12) -> FitReport:
    """Fit a torus of revolution about the z-axis.

    Points reduce to meridian coordinates (rho, z); the meridian circle
    (center (rho0, z0), radius r) is fit algebraically plus one Gauss-Newton
    pass.  The report carries a shape hint: 'ring' (rho0 > r), 'horn'
    (rho0 ~ r) or 'spindle' (rho0 < r, the self-intersecting case).  Raises
    NotAxisymmetric when residuals organize by azimuth more than 3x the
    meridian RMS, which a surface of revolution cannot produce.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[0] < 10:
        raise DegenerateCloud("torus fit needs >= 10 points")
    rho = np.hypot(pts[:, 0], pts[:, 1])
    z = pts[:, 2]
    meridian = np.column_stack([rho, z])
    spread = meridian.std(axis=0)
    if min(spread) <= 1e-12 * max(max(spread), 1.0):
        raise DegenerateCloud("meridian points are degenerate (line or point)")

    design = np.column_stack([2.0 * meridian, np.ones(len(pts))])
    rhs = np.sum(meridian * meridian, axis=1)
    sol, *_ = np.linalg.lstsq(design, rhs, rcond=None)
    center = sol[:2]
    radius = math.sqrt(max(sol[2] + float(center @ center), 0.0))

    diff = meridian - center
    dist = np.maximum(np.linalg.norm(diff, axis=1), 1e-30)
    jac = np.column_stack([-diff / dist[:, None], -np.ones(len(pts))])
    res = dist - radius
    step, *_ = np.linalg.lstsq(jac, -res, rcond=None)
    center = center + step[:2]
    radius = radius + step[2]

    residuals = np.linalg.norm(meridian - center, axis=1) - radius
    rms = float(np.sqrt(np.mean(residuals ** 2)))

    az = np.arctan2(pts[:, 1], pts[:, 0])
    bins = np.minimum((az + math.pi) / (2.0 * math.pi) * azimuth_bins,
                      azimuth_bins - 1).astype(int)
    bin_means = [residuals[bins == b].mean() for b in range(azimuth_bins)
                 if np.any(bins == b)]
    structure = max(bin_means) - min(bin_means) if bin_means else 0.0
    scale = float(np.max(np.abs(meridian))) or 1.0
    if structure > 3.0 * max(rms, 1e-12 * scale):
        raise NotAxisymmetric(
            f"azimuthal residual structure {structure:.3g} exceeds 3x RMS {rms:.3g}"
        )

    rho0, z0 = float(center[0]), float(center[1])
    tol = 3.0 * max(rms, 1e-9 * scale)
    if rho0 > radius + tol:
        hint = "ring"
    elif rho0 < radius - tol:
        hint = "spindle"
    else:
        hint = "horn"
    params = {"rho0": rho0, "z0": z0, "r": float(radius), "hint": hint}
    return _report("torus", params, residuals)
