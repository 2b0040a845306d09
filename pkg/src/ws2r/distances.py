"""Distance-geometry core.

Squared-distance data model for the five-point bar-and-joint skeleton of a
two-revolute-joint arm (two points per joint axis plus the end effector),
Cayley-Menger determinants, realizability checks, and trilateration of the
points into a canonical Cartesian frame.

All functions are pure; inputs are immutable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateAxis2, DegenerateFrame, NotEmbeddable

# Default relative tolerance for realizability: a simplex determinant of
# order d (length^d units) counts as violated below -EMBED_REL_TOL * L**d.
EMBED_REL_TOL = 1e-9

# Looser clamp used when projecting measured data (mm-rounded distances) to
# the nearest consistent geometry instead of rejecting it.
MEASUREMENT_CLAMP_REL = 1e-3

_FIELD_INDEX = {
    "s12": (0, 1), "s13": (0, 2), "s14": (0, 3), "s23": (1, 2),
    "s24": (1, 3), "s34": (2, 3), "s35": (2, 4), "s45": (3, 4),
}


@dataclass(frozen=True)
class DistanceSet:
    """The eight pose-independent squared distances of the arm skeleton.

    P1/P2 span the first joint axis, P3/P4 the second, P5 is the end
    effector.  Units are squared lengths (mm^2 for the bundled data).  The
    end-effector distances to P1 and P2 change with the joint angles and are
    deliberately not part of this record.

    A usable geometry needs s12 > 0 and s34 > 0 (each axis spans two
    distinct points).  Construction tolerates zero spans so raw marker data
    always converts; embedding and sweeping reject them with
    DegenerateFrame / DegenerateAxis2.
    """

    s12: float
    s13: float
    s14: float
    s23: float
    s24: float
    s34: float
    s35: float
    s45: float

    def __post_init__(self):
        for name in _FIELD_INDEX:
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0.0:
                raise ValueError(f"{name} must be finite and >= 0, got {value}")

    @classmethod
    def from_distances(cls, d12, d13, d14, d23, d24, d34, d35, d45) -> "DistanceSet":
        """Build from plain (non-squared) distances."""
        return cls(d12 * d12, d13 * d13, d14 * d14, d23 * d23,
                   d24 * d24, d34 * d34, d35 * d35, d45 * d45)

    # plain-distance accessors
    @property
    def d12(self) -> float: return math.sqrt(self.s12)
    @property
    def d13(self) -> float: return math.sqrt(self.s13)
    @property
    def d14(self) -> float: return math.sqrt(self.s14)
    @property
    def d23(self) -> float: return math.sqrt(self.s23)
    @property
    def d24(self) -> float: return math.sqrt(self.s24)
    @property
    def d34(self) -> float: return math.sqrt(self.s34)
    @property
    def d35(self) -> float: return math.sqrt(self.s35)
    @property
    def d45(self) -> float: return math.sqrt(self.s45)

    @property
    def scale(self) -> float:
        """Characteristic length L: the largest of the eight distances."""
        return math.sqrt(max(getattr(self, n) for n in _FIELD_INDEX))

    def as_distance_dict(self) -> dict[str, float]:
        """Plain distances keyed d12..d45 in canonical order."""
        return {"d" + name[1:]: math.sqrt(getattr(self, name)) for name in _FIELD_INDEX}

    def full_table(self, s15: float, s25: float) -> np.ndarray:
        """Complete 5x5 squared-distance table for given end-effector terms."""
        t = np.zeros((5, 5))
        for name, (i, j) in _FIELD_INDEX.items():
            t[i, j] = t[j, i] = getattr(self, name)
        t[0, 4] = t[4, 0] = s15
        t[1, 4] = t[4, 1] = s25
        return t


def squared_distance_table(points: np.ndarray) -> np.ndarray:
    """Pairwise squared distances of an (n, d) point array."""
    diff = points[:, None, :] - points[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def _bordered(table: np.ndarray) -> np.ndarray:
    n = table.shape[0]
    m = np.empty((n + 1, n + 1))
    m[0, 0] = 0.0
    m[0, 1:] = 1.0
    m[1:, 0] = 1.0
    m[1:, 1:] = table
    return m


def cm_det_5(table: np.ndarray) -> float:
    """Cayley-Menger determinant of five points: -(1/16) * det of the
    bordered 6x6 squared-distance matrix.

    Zero (up to rounding) whenever the table is realizable by points in
    3-space.  NaN inputs propagate.
    """
    table = np.asarray(table, dtype=float)
    return -np.linalg.det(_bordered(table)) / 16.0


def cm_det_5_many(tables: np.ndarray) -> np.ndarray:
    """Batched `cm_det_5` over an (n, 5, 5) stack of tables."""
    tables = np.asarray(tables, dtype=float)
    n = tables.shape[0]
    m = np.zeros((n, 6, 6))
    m[:, 0, 1:] = 1.0
    m[:, 1:, 0] = 1.0
    m[:, 1:, 1:] = tables
    return -np.linalg.det(m) / 16.0


def cm_det_block(table: np.ndarray) -> float:
    """Same value as `cm_det_5`, computed through the 3x3 block identity.

    Reordering the points as (4, 3, 2, 1, 5) splits the bordered matrix so
    that det = det(E) * det(A - B*C*B^T) with E the 3x3 block over points
    (2, 1, 5), det(E) = 2*s12*s15*s25 and C = E^-1.  The -1/16 prefactor of
    the bordered-determinant convention is applied on top, so the result
    matches `cm_det_5` for any table, realizable or not.
    """
    table = np.asarray(table, dtype=float)
    s12, s15, s25 = table[0, 1], table[0, 4], table[1, 4]
    eps = 1e-12 * float(np.nanmax(table))
    if not (s12 > eps and s15 > eps and s25 > eps):
        raise DegenerateFrame(
            f"block form needs s12, s15, s25 > {eps:.3g}; "
            f"got {s12:.3g}, {s15:.3g}, {s25:.3g}"
        )
    det3 = _block_schur_det(table, np.asarray(s15), np.asarray(s25))
    return float(-(2.0 * s12 * s15 * s25 * det3) / 16.0)


def _block_schur_det(table: np.ndarray, s15, s25):
    """det(A - B*C*B^T) with s15/s25 possibly arrays (vectorized use)."""
    s12 = table[0, 1]
    s13, s14 = table[0, 2], table[0, 3]
    s23, s24 = table[1, 2], table[1, 3]
    s34, s35, s45 = table[2, 3], table[2, 4], table[3, 4]

    a = [[0.0, 1.0, 1.0], [1.0, 0.0, s34], [1.0, s34, 0.0]]
    b = [[1.0, 1.0, 1.0], [s24, s14, s45], [s23, s13, s35]]

    # C = inverse of [[0, s12, s25], [s12, 0, s15], [s25, s15, 0]]
    c = [[-0.5 * s15 / (s12 * s25), 0.5 / s12, 0.5 / s25],
         [0.5 / s12, -0.5 * s25 / (s12 * s15), 0.5 / s15],
         [0.5 / s25, 0.5 / s15, -0.5 * s12 / (s15 * s25)]]

    m = [[None] * 3 for _ in range(3)]
    for i in range(3):
        for j in range(3):
            acc = 0.0
            for k in range(3):
                for l in range(3):
                    acc = acc + b[i][k] * c[k][l] * b[j][l]
            m[i][j] = a[i][j] - acc

    return (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))


def cm_det_3(s_ab: float, s_ac: float, s_bc: float) -> float:
    """Three-point Cayley-Menger determinant, sign-fixed to 16 * area^2.

    Nonnegative for any realizable triangle; zero for collinear points.
    """
    m = _bordered(np.array([[0.0, s_ab, s_ac], [s_ab, 0.0, s_bc], [s_ac, s_bc, 0.0]]))
    return -float(np.linalg.det(m))


def cm_det_4(table: np.ndarray) -> float:
    """Four-point Cayley-Menger determinant, sign-fixed to 288 * volume^2.

    Nonnegative for any tetrahedron realizable in 3-space; zero when the
    four points are coplanar.
    """
    table = np.asarray(table, dtype=float)
    return float(np.linalg.det(_bordered(table)))


@dataclass(frozen=True)
class CmResult:
    """A Cayley-Menger value together with the length scale used to judge it.

    For five points realized in 3-space, abs(value) / scale**6 stays below
    1e-9 (the package-wide residual convention; the raw determinant itself
    grows like scale**8).
    """

    value: float
    scale: float

    @property
    def normalized(self) -> float:
        return self.value / self.scale ** 6


def cm_residual(table: np.ndarray) -> CmResult:
    """`cm_det_5` of a full table plus its normalization scale."""
    table = np.asarray(table, dtype=float)
    scale = math.sqrt(float(np.max(table)))
    return CmResult(cm_det_5(table), scale if scale > 0 else 1.0)


@dataclass(frozen=True)
class EmbeddabilityReport:
    """Outcome of the realizability checks, simplex by simplex."""

    embeddable: bool
    first_violation: str | None
    checks: tuple[tuple[str, float, float], ...]  # (simplex, value, tolerance)

    def __bool__(self) -> bool:
        return self.embeddable


def _simplex_checks(ds: DistanceSet, rel_tol: float):
    """Yield (name, conventioned determinant, tolerance) for every gate."""
    L2 = ds.scale ** 2
    tol3 = rel_tol * L2 ** 2
    tol4 = rel_tol * L2 ** 3
    yield "triangle(1,2,3)", cm_det_3(ds.s12, ds.s13, ds.s23), tol3
    yield "triangle(1,2,4)", cm_det_3(ds.s12, ds.s14, ds.s24), tol3
    yield "triangle(1,3,4)", cm_det_3(ds.s13, ds.s14, ds.s34), tol3
    yield "triangle(2,3,4)", cm_det_3(ds.s23, ds.s24, ds.s34), tol3
    base = np.array([
        [0.0, ds.s12, ds.s13, ds.s14],
        [ds.s12, 0.0, ds.s23, ds.s24],
        [ds.s13, ds.s23, 0.0, ds.s34],
        [ds.s14, ds.s24, ds.s34, 0.0],
    ])
    yield "tetrahedron(1,2,3,4)", cm_det_4(base), tol4
    # P5 only needs a nonempty circle about the second axis.
    yield "triangle(3,4,5)", cm_det_3(ds.s34, ds.s35, ds.s45), tol3


def is_embeddable(ds: DistanceSet, rel_tol: float = EMBED_REL_TOL) -> EmbeddabilityReport:
    """Check that P1..P4 admit a 3-space realization and P5's circle exists.

    Never raises; the report names the first violated simplex, if any.
    """
    checks = tuple(_simplex_checks(ds, rel_tol))
    first = next((name for name, value, tol in checks if value < -tol), None)
    return EmbeddabilityReport(first is None, first, checks)


@dataclass(frozen=True, eq=False)
class Embedding:
    """Cartesian realization of a DistanceSet in the canonical frame:
    P1 at the origin, P2 on the positive z-axis, P3 in the x >= 0 half of
    the xz-plane, P5 at its reference joint pose (see `embed`).
    """

    p1: np.ndarray
    p2: np.ndarray
    p3: np.ndarray
    p4: np.ndarray
    p5: np.ndarray

    def points(self) -> np.ndarray:
        return np.stack([self.p1, self.p2, self.p3, self.p4, self.p5])

    def distance_set(self) -> DistanceSet:
        t = squared_distance_table(self.points())
        return DistanceSet(t[0, 1], t[0, 2], t[0, 3], t[1, 2],
                           t[1, 3], t[2, 3], t[2, 4], t[3, 4])

    def full_table(self) -> np.ndarray:
        return squared_distance_table(self.points())


def _clamped_sqrt(value: float, tol: float, simplex: str) -> float:
    """sqrt with the near-degenerate band [-tol, 0) clamped to zero."""
    if value < -tol:
        raise NotEmbeddable(simplex, value, tol)
    return math.sqrt(value) if value > 0.0 else 0.0


def embed(ds: DistanceSet, branch: int = 1, clamp_rel: float = EMBED_REL_TOL) -> Embedding:
    """Trilaterate the five points into the canonical frame.

    `branch` (+1 or -1) picks between the two mirror placements of P4 (and
    with it P5); the quartic workspace depends on distances only, so either
    branch sweeps the same surface.  `clamp_rel` sets the relative slack on
    squared coordinates that is clamped to zero instead of rejected; pass
    `MEASUREMENT_CLAMP_REL` for mm-rounded measured data.

    P5 is placed on its circle about the P3-P4 axis at the phase that
    maximizes z (ties broken toward +x when the axis is parallel to z).
    """
    if branch not in (1, -1):
        raise ValueError("branch must be +1 or -1")
    L2 = ds.scale ** 2
    tol = clamp_rel * L2

    if ds.s12 <= 1e-24 * L2:
        raise DegenerateFrame("s12 ~ 0: first axis undefined (P1 = P2)")
    d12 = ds.d12
    z3 = (ds.s13 + ds.s12 - ds.s23) / (2.0 * d12)
    x3 = _clamped_sqrt(ds.s13 - z3 * z3, tol, "triangle(1,2,3)")
    p3 = np.array([x3, 0.0, z3])

    z4 = (ds.s14 + ds.s12 - ds.s24) / (2.0 * d12)
    if x3 > 1e-12 * ds.scale:
        x4 = ((ds.s14 + ds.s13 - ds.s34) / 2.0 - z3 * z4) / x3
        y4 = branch * _clamped_sqrt(ds.s14 - x4 * x4 - z4 * z4, tol,
                                    "tetrahedron(1,2,3,4)")
    else:
        # P3 sits on the first axis: the frame still has a free azimuth,
        # fixed by putting P4 in the xz-plane at x >= 0.
        x4 = _clamped_sqrt(ds.s14 - z4 * z4, tol, "triangle(1,2,4)")
        y4 = 0.0
    p4 = np.array([x4, y4, z4])

    axis = p4 - p3
    d34 = float(np.linalg.norm(axis))
    if d34 <= 1e-12 * ds.scale:
        raise DegenerateAxis2("P3 and P4 coincide; second axis undefined")
    u = axis / d34
    # Foot and radius of P5's circle about the realized second axis; using
    # the realized axis length keeps s35/s45 exactly reproduced even after
    # clamping shifted P4.
    t5 = (ds.s35 - ds.s45 + d34 * d34) / (2.0 * d34)
    r5 = _clamped_sqrt(ds.s35 - t5 * t5, tol, "triangle(3,4,5)")
    w = np.array([0.0, 0.0, 1.0]) - u[2] * u
    wn = float(np.linalg.norm(w))
    if wn > 1e-9:
        w /= wn
    else:
        w = np.array([1.0, 0.0, 0.0]) - u[0] * u
        w /= np.linalg.norm(w)
    p5 = p3 + t5 * u + r5 * w

    return Embedding(np.zeros(3), np.array([0.0, 0.0, d12]), p3, p4, p5)


@dataclass(frozen=True)
class ProjectionReport:
    """Raw-versus-projected distance discrepancy after embedding."""

    deltas_mm: dict[str, float]

    @property
    def max_delta_mm(self) -> float:
        return max(self.deltas_mm.values())


def project_to_consistency(
    ds: DistanceSet, branch: int = 1, clamp_rel: float = MEASUREMENT_CLAMP_REL
) -> tuple[Embedding, DistanceSet, ProjectionReport]:
    """Replace a (possibly noisy) distance set by its embedded geometry.

    Returns the embedding, the re-derived consistent distance set, and a
    report of how far each distance moved.  Exact inputs project onto
    themselves.
    """
    emb = embed(ds, branch=branch, clamp_rel=clamp_rel)
    projected = emb.distance_set()
    raw = ds.as_distance_dict()
    proj = projected.as_distance_dict()
    deltas = {key: abs(raw[key] - proj[key]) for key in raw}
    return emb, projected, ProjectionReport(deltas)
