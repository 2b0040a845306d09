"""Workspace analysis of two-revolute-joint arms from pairwise distances."""

from .distances import (
    CmResult,
    DistanceSet,
    EmbeddabilityReport,
    Embedding,
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
from .errors import (
    DegenerateAxis2,
    DegenerateCloud,
    DegenerateFrame,
    IllConditioned,
    MissingMarker,
    NonUnitAxis,
    NotAxisymmetric,
    NotEmbeddable,
    ResidualBoundExceeded,
    Ws2rError,
)
from .calibration import (
    FitReport,
    MarkerFrame,
    canonical_transform,
    distances_from_markers,
    fit_plane,
    fit_sphere,
    fit_torus_of_revolution,
)
from .kinematics import (
    DEFAULT_LIMITS,
    JointLimits,
    SweepCloud,
    rotate_about_axis,
    sweep,
    sweep_blocks,
    wedge_mask,
)
from .surface import (
    CanonicalSurface,
    QuarticCoefficients,
    Topology,
    TopologyClass,
    canonical_reduce,
    classify,
    extract_coefficients,
    surface_residual,
    surface_residual_many,
)

__version__ = "0.1.0"
