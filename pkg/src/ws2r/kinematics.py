"""Forward-kinematics sweep of the two joint angles.

Rotating the first joint moves P3, P4, P5 rigidly about the z-axis;
rotating the second joint moves P5 alone about the current P3-P4 line.
Both rotations preserve every pairwise distance, so each swept end-effector
position lies on the implicit workspace surface - which makes the sweep an
independent oracle for the surface code.

The sweep composes the rotations as: second-joint rotation about the
already-rotated axis, i.e. p5(t1, t2) = Rz(t1) @ rot_axis2(t2) @ p5, which
equals rotating about axis 2 first and then applying the base rotation.

Grid generation is embarrassingly parallel over first-angle blocks;
`sweep_blocks` exposes the pure per-block computation for streaming or
concurrent use, and assembly is deterministic row-major in (theta1, theta2).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Iterator

import numpy as np

from .distances import DistanceSet, Embedding
from .errors import DegenerateAxis2, NonUnitAxis, ResidualBoundExceeded
from .surface import surface_residual_many

# Joint limits and step of the reference experimental protocol (degrees).
DEFAULT_LIMITS = None  # assigned below once JointLimits exists

FULL_STEP_DEG = 0.088
DEFAULT_DECIMATION = 32


@dataclass(frozen=True)
class JointLimits:
    """Reachable angle ranges of the two joints, in degrees."""

    theta1_min: float = 10.0
    theta1_max: float = 350.0
    theta2_min: float = 53.0
    theta2_max: float = 307.0
    step: float = FULL_STEP_DEG

    def __post_init__(self):
        if not self.theta1_min < self.theta1_max:
            raise ValueError("theta1_min must be < theta1_max")
        if not self.theta2_min < self.theta2_max:
            raise ValueError("theta2_min must be < theta2_max")
        span = min(self.theta1_max - self.theta1_min,
                   self.theta2_max - self.theta2_min)
        if not 0.0 < self.step <= span:
            raise ValueError("step must be in (0, min span]")

    def grid(self, decimation: int = 1) -> tuple[np.ndarray, np.ndarray]:
        """Angle grids at `step * decimation`, inclusive of the lower limit."""
        if decimation < 1 or decimation != int(decimation):
            raise ValueError("decimation must be an integer >= 1")
        eff = self.step * decimation
        n1 = int(math.floor((self.theta1_max - self.theta1_min) / eff + 1e-9)) + 1
        n2 = int(math.floor((self.theta2_max - self.theta2_min) / eff + 1e-9)) + 1
        t1 = self.theta1_min + eff * np.arange(n1)
        t2 = self.theta2_min + eff * np.arange(n2)
        return t1, t2


DEFAULT_LIMITS = JointLimits()


def rotate_about_axis(p, axis_point, axis_dir, angle: float) -> np.ndarray:
    """Rotate a point about an arbitrary axis (Rodrigues form).

    `axis_dir` must be unit length to 1e-12.  Distances from the point to
    the axis are preserved to rounding.
    """
    axis_dir = np.asarray(axis_dir, dtype=float)
    if abs(float(np.linalg.norm(axis_dir)) - 1.0) > 1e-12:
        raise NonUnitAxis(f"axis direction norm {np.linalg.norm(axis_dir):.15f} != 1")
    p = np.asarray(p, dtype=float)
    axis_point = np.asarray(axis_point, dtype=float)
    v = p - axis_point
    c, s = math.cos(angle), math.sin(angle)
    rotated = v * c + np.cross(axis_dir, v) * s + axis_dir * float(axis_dir @ v) * (1.0 - c)
    return axis_point + rotated


def _axis2_circle(emb: Embedding, theta2_rad: np.ndarray) -> np.ndarray:
    """P5 rotated about the P3-P4 axis by each angle; (n, 3)."""
    axis = emb.p4 - emb.p3
    d34 = float(np.linalg.norm(axis))
    u = axis / d34
    v = emb.p5 - emb.p3
    c = np.cos(theta2_rad)[:, None]
    s = np.sin(theta2_rad)[:, None]
    return (emb.p3[None, :] + v[None, :] * c + np.cross(u, v)[None, :] * s
            + u[None, :] * float(u @ v) * (1.0 - c))


@dataclass(frozen=True, eq=False)
class SweepCloud:
    """End-effector grid cloud with per-point joint angles and residuals.

    Arrays are row-major in (theta1, theta2); `grid_shape` is kept while the
    cloud is a full grid and dropped (None) once points have been masked.
    """

    theta1: np.ndarray
    theta2: np.ndarray
    points: np.ndarray
    residuals: np.ndarray
    source: DistanceSet
    grid_shape: tuple[int, int] | None
    residual_bound: float | None = None

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def max_residual(self) -> float:
        return float(np.max(np.abs(self.residuals))) if len(self) else 0.0

    @property
    def mean_residual(self) -> float:
        return float(np.mean(np.abs(self.residuals))) if len(self) else 0.0


def _check_axis2(emb: Embedding) -> None:
    d34sq = float(np.sum((emb.p4 - emb.p3) ** 2))
    scale = float(np.max(np.abs(emb.points()))) or 1.0
    if d34sq <= 1e-12 * scale * scale:
        raise DegenerateAxis2("P3 and P4 coincide; second axis undefined")


def sweep_blocks(
    emb: Embedding,
    limits: JointLimits = DEFAULT_LIMITS,
    decimation: int = 1,
    block_rows: int = 256,
) -> Iterator[tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """Yield (theta1_block, theta2, points_block) in row-major order.

    points_block has shape (len(theta1_block) * len(theta2), 3).  Each block
    is a pure function of its inputs, so blocks may be computed concurrently
    and reassembled in index order.
    """
    _check_axis2(emb)
    t1, t2 = limits.grid(decimation)
    circle = _axis2_circle(emb, np.radians(t2))
    for start in range(0, len(t1), block_rows):
        chunk = t1[start:start + block_rows]
        yield chunk, t2, _rotated_block(circle, np.radians(chunk))


def _rotated_block(circle: np.ndarray, theta1_rad: np.ndarray) -> np.ndarray:
    c = np.cos(theta1_rad)[:, None]
    s = np.sin(theta1_rad)[:, None]
    x = c * circle[None, :, 0] - s * circle[None, :, 1]
    y = s * circle[None, :, 0] + c * circle[None, :, 1]
    z = np.broadcast_to(circle[None, :, 2], x.shape)
    return np.stack([x, y, z], axis=-1).reshape(-1, 3)


def sweep(
    emb: Embedding,
    limits: JointLimits = DEFAULT_LIMITS,
    decimation: int = DEFAULT_DECIMATION,
    residual_bound: float | None = None,
    workers: int = 1,
) -> SweepCloud:
    """Materialize the full joint-angle grid cloud.

    Angles are measured from the embedding's reference pose (P5 at its
    maximal-z circle phase); the hardware zero convention is not recoverable
    from distances, so surfaces rather than angle labels are the comparable
    output.  Raises ResidualBoundExceeded if a bound is declared and the
    worst scaled residual exceeds it.
    """
    _check_axis2(emb)
    t1, t2 = limits.grid(decimation)
    circle = _axis2_circle(emb, np.radians(t2))
    starts = list(range(0, len(t1), 256))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(
                lambda s: _rotated_block(circle, np.radians(t1[s:s + 256])), starts))
    else:
        blocks = [_rotated_block(circle, np.radians(t1[s:s + 256])) for s in starts]
    points = np.concatenate(blocks) if blocks else np.zeros((0, 3))

    ds = emb.distance_set()
    residuals = surface_residual_many(ds, points)
    cloud = SweepCloud(
        theta1=np.repeat(t1, len(t2)),
        theta2=np.tile(t2, len(t1)),
        points=points,
        residuals=residuals,
        source=ds,
        grid_shape=(len(t1), len(t2)),
        residual_bound=residual_bound,
    )
    if residual_bound is not None and cloud.max_residual > residual_bound:
        raise ResidualBoundExceeded(
            f"max scaled residual {cloud.max_residual:.3e} > bound {residual_bound:.3e}"
        )
    return cloud


def azimuth_deg(points: np.ndarray) -> np.ndarray:
    """atan2 azimuth of each point, wrapped to [0, 360)."""
    az = np.degrees(np.arctan2(points[:, 1], points[:, 0]))
    return np.mod(az, 360.0)


def wedge_mask(cloud: SweepCloud, azimuth_range: tuple[float, float] | None) -> SweepCloud:
    """Remove points whose azimuth falls in [start, end) degrees.

    The range may wrap through 0; a span of 360 removes everything and an
    empty range (or None) is the identity.  Mirrors occlusion of a tracking
    volume for comparison against partially observed clouds.
    """
    if azimuth_range is None:
        return cloud
    start, end = azimuth_range
    span = end - start
    if span == 0.0:
        return cloud
    if not 0.0 < span <= 360.0:
        raise ValueError("azimuth range span must be in (0, 360]")
    az = azimuth_deg(cloud.points)
    keep = np.mod(az - start, 360.0) >= span
    return replace(
        cloud,
        theta1=cloud.theta1[keep],
        theta2=cloud.theta2[keep],
        points=cloud.points[keep],
        residuals=cloud.residuals[keep],
        grid_shape=None,
    )
