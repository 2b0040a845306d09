"""Workspace surface of the two-joint arm.

The set of end-effector positions reachable by rotating both joints is the
zero set of a quartic in (x, y, z): substituting the pose-dependent
end-effector distances into the five-point Cayley-Menger condition and
normalizing by L**6 gives a dimensionless residual that vanishes exactly on
the workspace.  This module evaluates that residual, recovers the six
coefficients of the quartic in its axisymmetric monomial basis, classifies
the axis geometry into the four topology categories, and produces the
canonical surface for each category.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass

import numpy as np

from .distances import DistanceSet, Embedding, cm_det_5_many, is_embeddable
from .errors import IllConditioned, NotEmbeddable

# Denominator guard for the block evaluation path, relative to L**2.
DENOMINATOR_REL_EPS = 1e-12

# Default relative tolerance for topology decisions (CLI-overridable).
DEFAULT_TAU = 0.05

_COEFF_SEED = 1848867


@functools.lru_cache(maxsize=256)
def _require_embeddable(ds: DistanceSet) -> None:
    report = is_embeddable(ds)
    if not report:
        checks = {name: (value, tol) for name, value, tol in report.checks}
        value, tol = checks[report.first_violation]
        raise NotEmbeddable(report.first_violation, value, tol)


def surface_residual_many(ds: DistanceSet, points: np.ndarray) -> np.ndarray:
    """Scaled implicit-surface residual at an (n, 3) array of points.

    Uses the 3x3 block form wherever the end-effector distances to P1 and
    P2 stay clear of zero, and the plain bordered determinant otherwise.
    Zero (within rounding) exactly on the reachable workspace surface.
    """
    _require_embeddable(ds)
    points = np.atleast_2d(np.asarray(points, dtype=float))
    x, y, z = points[:, 0], points[:, 1], points[:, 2]
    s15 = x * x + y * y + z * z
    s25 = s15 - 2.0 * ds.d12 * z + ds.s12

    L2 = ds.scale ** 2
    eps = DENOMINATOR_REL_EPS * max(L2, float(np.max(s15, initial=0.0)))
    safe = (s15 > eps) & (s25 > eps)

    out = np.empty(points.shape[0])
    if np.any(safe):
        out[safe] = _block_residual(ds, s15[safe], s25[safe])
    if not np.all(safe):
        idx = np.flatnonzero(~safe)
        tables = np.stack([ds.full_table(s15[i], s25[i]) for i in idx])
        out[idx] = cm_det_5_many(tables)
    return out / ds.scale ** 6


def surface_residual(ds: DistanceSet, point) -> float:
    """Scalar convenience wrapper around `surface_residual_many`."""
    return float(surface_residual_many(ds, np.asarray(point, dtype=float)[None, :])[0])


def _block_residual(ds: DistanceSet, s15: np.ndarray, s25: np.ndarray) -> np.ndarray:
    """-(1/16) * 2*s12*s15*s25*det(A - B C B^T), vectorized over s15/s25."""
    s12 = ds.s12
    b = ((1.0, 1.0, 1.0),
         (ds.s24, ds.s14, ds.s45),
         (ds.s23, ds.s13, ds.s35))
    a = ((0.0, 1.0, 1.0), (1.0, 0.0, ds.s34), (1.0, ds.s34, 0.0))

    c = [[-0.5 * s15 / (s12 * s25), 0.5 / s12, 0.5 / s25],
         [0.5 / s12, -0.5 * s25 / (s12 * s15), 0.5 / s15],
         [0.5 / s25, 0.5 / s15, -0.5 * s12 / (s15 * s25)]]

    m = [[a[i][j] - sum(b[i][k] * c[k][l] * b[j][l] for k in range(3) for l in range(3))
          for j in range(3)] for i in range(3)]

    det3 = (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))
    return -(2.0 * s12 * s15 * s25 * det3) / 16.0


# -- quartic coefficients ---------------------------------------------------

# Length degree of each basis monomial, used for scale-aware normalization.
_BASIS_DEGREES = (4, 4, 2, 2, 2, 0)


def _basis_matrix(points: np.ndarray, d12: float) -> np.ndarray:
    """Columns: (r2)^2, d12*z*r2, x^2+y^2, z^2, d12*z, 1  with r2 = x^2+y^2+z^2."""
    x, y, z = points[:, 0], points[:, 1], points[:, 2]
    r2 = x * x + y * y + z * z
    one = np.ones_like(z)
    return np.column_stack([r2 * r2, d12 * z * r2, x * x + y * y, z * z, d12 * z, one])


@dataclass(frozen=True)
class QuarticCoefficients:
    """Coefficients of the workspace quartic in its fixed monomial basis.

    residual(p) ~ radial4*(x2+y2+z2)^2 + radial2_axial*d12*z*(x2+y2+z2)
                + planar*(x2+y2) + axial2*z^2 + axial*d12*z + constant

    Coefficients are normalized so that max |c_i| * L**deg_i = 1; multiplying
    `evaluate` by `value_scale` reproduces the determinant-route residual of
    `surface_residual`.  `held_out_residual` is the worst disagreement (in
    determinant-residual units) on points not used for the fit.
    """

    radial4: float
    radial2_axial: float
    planar: float
    axial2: float
    axial: float
    constant: float
    d12: float
    value_scale: float
    length_scale: float
    held_out_residual: float

    def as_array(self) -> np.ndarray:
        return np.array([self.radial4, self.radial2_axial, self.planar,
                         self.axial2, self.axial, self.constant])

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return _basis_matrix(points, self.d12) @ self.as_array()

    def evaluate_scaled(self, points: np.ndarray) -> np.ndarray:
        """Evaluation in the same units as `surface_residual`."""
        return self.evaluate(points) * self.value_scale


def _coefficient_sample_points(scale: float, n: int, rng: np.random.Generator) -> np.ndarray:
    dirs = rng.normal(size=(n, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    radii = scale * rng.uniform(0.4, 1.6, size=n)
    return dirs * radii[:, None]


def extract_coefficients(
    ds: DistanceSet, n_fit: int = 16, n_holdout: int = 8
) -> QuarticCoefficients:
    """Recover the six quartic coefficients by interpolation.

    Evaluates the determinant-route residual at a fixed, seeded set of
    sample points, solves the 6-unknown linear system in a dimensionless
    version of the monomial basis, and validates on held-out points.
    Deterministic for a given distance set.
    """
    if n_fit < 8 or n_holdout < 4:
        raise ValueError("need at least 8 fit and 4 held-out points")
    _require_embeddable(ds)
    L = ds.scale
    rng = np.random.default_rng(_COEFF_SEED)
    fit_pts = _coefficient_sample_points(L, n_fit, rng)
    hold_pts = _coefficient_sample_points(L, n_holdout, rng)

    # Dimensionless basis: evaluate at p/L with d12/L so the design matrix
    # conditioning does not depend on the data's unit system.
    design = _basis_matrix(fit_pts / L, ds.d12 / L)
    values = surface_residual_many(ds, fit_pts)
    singulars = np.linalg.svd(design, compute_uv=False)
    cond = singulars[0] / singulars[-1] if singulars[-1] > 0 else math.inf
    if cond > 1e12:
        raise IllConditioned(f"coefficient design matrix condition {cond:.3g} > 1e12")
    coeffs_hat, *_ = np.linalg.lstsq(design, values, rcond=None)

    held = _basis_matrix(hold_pts / L, ds.d12 / L) @ coeffs_hat
    held_res = float(np.max(np.abs(held - surface_residual_many(ds, hold_pts))))

    norm = float(np.max(np.abs(coeffs_hat)))
    if norm <= 0.0:
        raise IllConditioned("all recovered coefficients are zero")
    physical = coeffs_hat / norm / L ** np.array(_BASIS_DEGREES, dtype=float)
    return QuarticCoefficients(*physical, d12=ds.d12, value_scale=norm,
                               length_scale=L, held_out_residual=held_res)


# -- topology classification ------------------------------------------------


class Topology(enum.Enum):
    SPHERICAL = "spherical"
    PUMA_LIKE = "puma_like"
    SCARA = "scara"
    GENERAL_ARTICULATED = "general_articulated"


@dataclass(frozen=True)
class TopologyClass:
    """Category of the axis-pair geometry plus canonical surface parameters.

    Diagnostics (axis_angle, common_normal, foot_height) are filled for all
    categories; canonical parameters only where they apply.  `axis2_foot`
    and `tube_offset` are signed positions along the second axis, measured
    from P3 and from the common-normal foot respectively, under the axis
    direction with nonnegative z-component.
    """

    category: Topology
    tau: float
    scale: float
    d12: float
    axis_angle: float
    common_normal: float
    foot_height: float | None = None
    axis2_foot: float | None = None
    radius: float | None = None
    center_height: float | None = None
    plane_height: float | None = None
    tube_radius: float | None = None
    tube_offset: float | None = None
    degenerate_tube: bool = False


def _axis2_direction(emb: Embedding) -> np.ndarray:
    u = emb.p4 - emb.p3
    u = u / np.linalg.norm(u)
    # Line orientation is a convention: prefer +z, then +y, then +x.
    for k in (2, 1, 0):
        if abs(u[k]) > 1e-12:
            return u if u[k] > 0 else -u
    return u


def classify(emb: Embedding, tau: float = DEFAULT_TAU) -> TopologyClass:
    """Classify the joint-axis geometry of an embedding.

    Decision on the line pair (axis 1 = z-axis, axis 2 through P3 and P4)
    with all thresholds relative to the distance scale L:

    - sin(angle) <= tau                          -> SCARA (parallel)
    - common normal <= tau*L, |z*| <= tau*L      -> spherical (meet at base)
    - common normal <= tau*L, z* > tau*L         -> PUMA-like (meet above)
    - otherwise                                  -> general articulated

    Ties resolve in that order (most specific constraint wins).  The
    categories depend only on the marker-invariant line geometry, not on
    where the markers sit along the axes.
    """
    if not 0.0 < tau < 1.0:
        raise ValueError("tau must be in (0, 1)")
    ds = emb.distance_set()
    L = ds.scale
    u = _axis2_direction(emb)
    ez = np.array([0.0, 0.0, 1.0])
    cross = np.cross(ez, u)
    sin_a = float(np.linalg.norm(cross))
    alpha = math.atan2(sin_a, abs(float(u[2])))

    d34 = float(np.linalg.norm(emb.p4 - emb.p3))
    t5 = (ds.s35 - ds.s45 + d34 * d34) / (2.0 * d34)
    # t5 is measured from p3 along (p4 - p3); re-sign onto the oriented u.
    if float(u @ (emb.p4 - emb.p3)) < 0.0:
        t5 = -t5
    r5 = math.sqrt(max(ds.s35 - t5 * t5, 0.0))

    common = dict(tau=tau, scale=L, d12=ds.d12, axis_angle=alpha)

    if sin_a <= tau:
        gap = float(np.linalg.norm(emb.p3 - (emb.p3 @ u) * u))
        return TopologyClass(Topology.SCARA, common_normal=gap,
                             plane_height=float(emb.p5[2]), **common)

    n = cross / sin_a
    g = abs(float(emb.p3 @ n))
    b = float(u[2])
    zstar = (float(emb.p3[2]) - float(u @ emb.p3) * b) / (1.0 - b * b)
    s_q = zstar * b - float(u @ emb.p3)

    if g <= tau * L and abs(zstar) <= tau * L:
        return TopologyClass(Topology.SPHERICAL, common_normal=g,
                             foot_height=zstar, axis2_foot=s_q,
                             radius=ds.d35, **common)
    if g <= tau * L and zstar > tau * L:
        return TopologyClass(Topology.PUMA_LIKE, common_normal=g,
                             foot_height=zstar, axis2_foot=s_q,
                             center_height=ds.d12, radius=ds.d45, **common)
    return TopologyClass(Topology.GENERAL_ARTICULATED, common_normal=g,
                         foot_height=zstar, axis2_foot=s_q,
                         tube_radius=r5, tube_offset=t5 - s_q,
                         degenerate_tube=r5 <= tau * L, **common)


# -- canonical surfaces -----------------------------------------------------


@dataclass(frozen=True, eq=False)
class CanonicalSurface:
    """Implicit evaluator for the canonical surface of a topology class.

    For spheres and planes `residual` is the plain implicit expression
    (quadratic / linear); for the general case it is the scaled quartic
    residual of a representative distance set reconstructed from the torus
    parameters, and `generator_points` samples the meridian circle whose
    revolution about the first axis sweeps the surface.
    """

    kind: Topology
    params: TopologyClass

    def residual(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        x, y, z = points[:, 0], points[:, 1], points[:, 2]
        p = self.params
        if self.kind is Topology.SPHERICAL:
            return x * x + y * y + z * z - p.radius ** 2
        if self.kind is Topology.PUMA_LIKE:
            return x * x + y * y + (z - p.center_height) ** 2 - p.radius ** 2
        if self.kind is Topology.SCARA:
            return z - p.plane_height
        ds = self._general_distance_set()
        return surface_residual_many(ds, points)

    def _general_frame(self):
        p = self.params
        u = np.array([0.0, math.sin(p.axis_angle), math.cos(p.axis_angle)])
        foot = np.array([p.common_normal, 0.0, p.foot_height])
        center = foot + p.tube_offset * u
        w1 = np.array([0.0, 0.0, 1.0]) - u[2] * u
        w1 /= np.linalg.norm(w1)
        w2 = np.cross(u, w1)
        return u, center, w1, w2

    def _general_distance_set(self) -> DistanceSet:
        p = self.params
        u, center, w1, _ = self._general_frame()
        half = max(p.scale / 4.0, 1e-3 * p.scale)
        foot = np.array([p.common_normal, 0.0, p.foot_height])
        pts = np.stack([
            np.zeros(3),
            np.array([0.0, 0.0, p.d12]),
            foot - half * u,
            foot + half * u,
            center + p.tube_radius * w1,
        ])
        from .distances import squared_distance_table

        t = squared_distance_table(pts)
        return DistanceSet(t[0, 1], t[0, 2], t[0, 3], t[1, 2],
                           t[1, 3], t[2, 3], t[2, 4], t[3, 4])

    def generator_points(self, n: int = 100) -> np.ndarray:
        """Meridian circle of the general surface (tube circle about axis 2)."""
        if self.kind is not Topology.GENERAL_ARTICULATED:
            raise ValueError("generator circle only exists for the general case")
        p = self.params
        _, center, w1, w2 = self._general_frame()
        phi = np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)
        return (center[None, :]
                + p.tube_radius * (np.cos(phi)[:, None] * w1[None, :]
                                   + np.sin(phi)[:, None] * w2[None, :]))

    def sample(self, n: int = 100, seed: int = 0) -> np.ndarray:
        """Deterministic sample of points on the canonical surface."""
        rng = np.random.default_rng(seed)
        p = self.params
        if self.kind in (Topology.SPHERICAL, Topology.PUMA_LIKE):
            dirs = rng.normal(size=(n, 3))
            dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
            center = np.array([0.0, 0.0, 0.0 if self.kind is Topology.SPHERICAL
                               else p.center_height])
            return center[None, :] + p.radius * dirs
        if self.kind is Topology.SCARA:
            xy = rng.uniform(-p.scale, p.scale, size=(n, 2))
            return np.column_stack([xy, np.full(n, p.plane_height)])
        theta = rng.uniform(0.0, 2.0 * math.pi, size=n)
        base = self.generator_points(n)
        cos_t, sin_t = np.cos(theta), np.sin(theta)
        x = cos_t * base[:, 0] - sin_t * base[:, 1]
        y = sin_t * base[:, 0] + cos_t * base[:, 1]
        return np.column_stack([x, y, base[:, 2]])


def canonical_reduce(tc: TopologyClass) -> CanonicalSurface:
    """Canonical implicit surface for a classified topology."""
    return CanonicalSurface(tc.category, tc)
