"""File formats: distance-set text, marker text, CSV clouds, ascii PLY.

Formats are fixed bit-for-bit so outputs diff cleanly and round-trip
byte-identically: canonical key order, '%.9g' number formatting, '#'
comments.  The readers are strict about structure and used by the test
suite to validate every writer.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import IO, Iterable

import numpy as np

from .calibration import MarkerFrame
from .distances import DistanceSet
from .errors import Ws2rError
from .kinematics import SweepCloud, azimuth_deg

DISTANCE_KEYS = ("d12", "d13", "d14", "d23", "d24", "d34", "d35", "d45")
EXTRA_KEYS = ("d15", "d25")  # reference-pose end-effector distances
_DISTANCE_HEADER = "# two-joint arm distance set (mm)"
_CSV_COMMENT = "# theta in degrees, x/y/z in mm, residual scaled by L^-6 (dimensionless)"
_CSV_HEADER = "theta1,theta2,x,y,z,gamma_residual"


class FormatError(Ws2rError):
    """Input file does not conform to the expected format."""


def _fmt(value: float) -> str:
    return f"{value:.9g}"


def format_distance_file(ds: DistanceSet, extras: dict[str, float] | None = None) -> str:
    lines = [_DISTANCE_HEADER]
    data = ds.as_distance_dict()
    for key in DISTANCE_KEYS:
        lines.append(f"{key} = {_fmt(data[key])}")
    if extras:
        for key in EXTRA_KEYS:
            if key in extras:
                lines.append(f"{key} = {_fmt(extras[key])}")
    return "\n".join(lines) + "\n"


def save_distance_file(path, ds: DistanceSet, extras: dict[str, float] | None = None) -> None:
    with open(path, "w", newline="\n") as f:
        f.write(format_distance_file(ds, extras))


def parse_distance_text(text: str) -> tuple[DistanceSet, dict[str, float]]:
    values: dict[str, float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise FormatError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, rhs = line.partition("=")
        key = key.strip()
        if key not in DISTANCE_KEYS and key not in EXTRA_KEYS:
            raise FormatError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise FormatError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = float(rhs)
        except ValueError as exc:
            raise FormatError(f"line {lineno}: bad number {rhs.strip()!r}") from exc
    missing = [k for k in DISTANCE_KEYS if k not in values]
    if missing:
        raise FormatError(f"missing required keys: {', '.join(missing)}")
    ds = DistanceSet.from_distances(*(values[k] for k in DISTANCE_KEYS))
    extras = {k: values[k] for k in EXTRA_KEYS if k in values}
    return ds, extras


def load_distance_file(path) -> tuple[DistanceSet, dict[str, float]]:
    with open(path) as f:
        return parse_distance_text(f.read())


def parse_inline_distances(spec: str) -> DistanceSet:
    """Inline form 'd12=58,d13=671,...' with all eight keys required."""
    text = "\n".join(part.strip().replace("=", " = ", 1)
                     for part in spec.split(",") if part.strip())
    ds, _ = parse_distance_text(text)
    return ds


def save_marker_file(path, frame: MarkerFrame) -> None:
    with open(path, "w", newline="\n") as f:
        f.write("# labeled markers, mm: P<i> x y z\n")
        labels = [("P1", frame.p1), ("P2", frame.p2), ("P3", frame.p3),
                  ("P4", frame.p4)]
        if frame.p5 is not None:
            labels.append(("P5", frame.p5))
        for name, p in labels:
            f.write(f"{name} {_fmt(p[0])} {_fmt(p[1])} {_fmt(p[2])}\n")


def load_marker_file(path) -> MarkerFrame:
    coords: dict[str, np.ndarray] = {}
    with open(path) as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 4:
                raise FormatError(f"line {lineno}: expected 'P<i> x y z', got {raw!r}")
            label = parts[0].upper()
            if label not in ("P1", "P2", "P3", "P4", "P5"):
                raise FormatError(f"line {lineno}: unknown marker label {parts[0]!r}")
            if label in coords:
                raise FormatError(f"line {lineno}: duplicate marker {label}")
            try:
                coords[label] = np.array([float(v) for v in parts[1:]])
            except ValueError as exc:
                raise FormatError(f"line {lineno}: bad coordinate in {raw!r}") from exc
    missing = [k for k in ("P1", "P2", "P3", "P4") if k not in coords]
    if missing:
        raise FormatError(f"missing markers: {', '.join(missing)}")
    return MarkerFrame(coords["P1"], coords["P2"], coords["P3"], coords["P4"],
                       coords.get("P5"))


def looks_like_marker_file(path) -> bool:
    """Sniff: first non-comment token is a P<i> marker label."""
    try:
        with open(path) as f:
            for raw in f:
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                return line.split()[0].upper() in ("P1", "P2", "P3", "P4", "P5")
    except OSError:
        return False
    return False


# -- CSV cloud ---------------------------------------------------------------


def write_cloud_csv_header(f: IO[str]) -> None:
    f.write(_CSV_COMMENT + "\n")
    f.write(_CSV_HEADER + "\n")


def write_cloud_rows(f: IO[str], theta1, theta2, points, residuals) -> None:
    rows = np.column_stack([theta1, theta2, points[:, 0], points[:, 1],
                            points[:, 2], residuals])
    np.savetxt(f, rows, fmt="%.9g", delimiter=",")


def write_cloud_csv(path, cloud: SweepCloud) -> None:
    with open(path, "w", newline="\n") as f:
        write_cloud_csv_header(f)
        write_cloud_rows(f, cloud.theta1, cloud.theta2, cloud.points, cloud.residuals)


def read_cloud_csv(path) -> dict[str, np.ndarray]:
    """Strict reader: comment line, exact header, six numeric columns."""
    with open(path) as f:
        comment = f.readline().rstrip("\n")
        header = f.readline().rstrip("\n")
        if not comment.startswith("#"):
            raise FormatError("cloud CSV must start with a unit comment line")
        if header != _CSV_HEADER:
            raise FormatError(f"unexpected CSV header {header!r}")
        data = np.loadtxt(f, delimiter=",", ndmin=2)
    if data.size == 0:
        data = data.reshape(0, 6)
    if data.shape[1] != 6:
        raise FormatError(f"expected 6 columns, found {data.shape[1]}")
    return {
        "theta1": data[:, 0], "theta2": data[:, 1],
        "points": data[:, 2:5], "residuals": data[:, 5],
    }


# -- PLY mesh ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MeshOutput:
    """Triangulated sweep-grid mesh with per-vertex scaled residuals."""

    vertices: np.ndarray   # (n, 3)
    faces: np.ndarray      # (m, 3) int vertex indices
    residuals: np.ndarray  # (n,)
    grid_shape: tuple[int, int]
    removed_vertices: int


def build_mesh(cloud: SweepCloud, wedge: tuple[float, float] | None = None) -> MeshOutput:
    """Triangulate a full-grid cloud, dropping wedge-masked vertices.

    Each grid quad splits into two triangles; a triangle survives only if
    all three corners do, which keeps the mesh manifold along the interior.
    """
    if cloud.grid_shape is None:
        raise ValueError("mesh needs a full-grid cloud (apply the wedge here instead)")
    n1, n2 = cloud.grid_shape
    keep = np.ones(len(cloud), dtype=bool)
    if wedge is not None:
        start, end = wedge
        span = end - start
        if span != 0.0:
            if not 0.0 < span <= 360.0:
                raise ValueError("azimuth range span must be in (0, 360]")
            az = azimuth_deg(cloud.points)
            keep = np.mod(az - start, 360.0) >= span

    new_index = np.cumsum(keep) - 1
    quads = []
    for i in range(n1 - 1):
        base = i * n2 + np.arange(n2 - 1)
        quads.append(np.column_stack([base, base + 1, base + n2, base + n2 + 1]))
    faces = []
    if quads:
        q = np.concatenate(quads)
        tri = np.concatenate([q[:, [0, 1, 3]], q[:, [0, 3, 2]]])
        ok = keep[tri].all(axis=1)
        faces = new_index[tri[ok]]
    faces = np.asarray(faces, dtype=int).reshape(-1, 3)
    return MeshOutput(
        vertices=cloud.points[keep],
        faces=faces,
        residuals=cloud.residuals[keep],
        grid_shape=(n1, n2),
        removed_vertices=int(np.sum(~keep)),
    )


def write_mesh_ply(path, mesh: MeshOutput) -> None:
    """ascii PLY with x/y/z plus a scalar gamma_residual vertex property."""
    with open(path, "w", newline="\n") as f:
        f.write("ply\n")
        f.write("format ascii 1.0\n")
        f.write(f"element vertex {len(mesh.vertices)}\n")
        f.write("property float x\n")
        f.write("property float y\n")
        f.write("property float z\n")
        f.write("property float gamma_residual\n")
        f.write(f"element face {len(mesh.faces)}\n")
        f.write("property list uchar int vertex_indices\n")
        f.write("end_header\n")
        rows = np.column_stack([mesh.vertices, mesh.residuals])
        np.savetxt(f, rows, fmt="%.9g", delimiter=" ")
        for face in mesh.faces:
            f.write(f"3 {face[0]} {face[1]} {face[2]}\n")


def read_mesh_ply(path) -> dict[str, np.ndarray]:
    """Strict ascii-PLY reader for the layout written by `write_mesh_ply`."""
    with open(path) as f:
        def line() -> str:
            return f.readline().rstrip("\n")

        if line() != "ply" or line() != "format ascii 1.0":
            raise FormatError("not an ascii PLY file")
        n_vertex = n_face = None
        properties: list[str] = []
        while True:
            item = line()
            if item == "end_header":
                break
            if item == "":
                raise FormatError("unterminated PLY header")
            parts = item.split()
            if parts[0] == "element":
                if parts[1] == "vertex":
                    n_vertex = int(parts[2])
                elif parts[1] == "face":
                    n_face = int(parts[2])
                else:
                    raise FormatError(f"unexpected element {parts[1]!r}")
            elif parts[0] == "property" and n_face is None and n_vertex is not None:
                properties.append(parts[-1])
        if n_vertex is None or n_face is None:
            raise FormatError("PLY header missing vertex or face element")
        if properties != ["x", "y", "z", "gamma_residual"]:
            raise FormatError(f"unexpected vertex properties {properties}")
        vertex_rows = np.loadtxt(f, max_rows=n_vertex, ndmin=2) if n_vertex else np.zeros((0, 4))
        if vertex_rows.shape != (n_vertex, 4):
            raise FormatError("vertex count mismatch")
        faces = np.zeros((n_face, 3), dtype=int)
        for i in range(n_face):
            parts = line().split()
            if len(parts) != 4 or parts[0] != "3":
                raise FormatError(f"face {i}: expected '3 a b c'")
            faces[i] = [int(v) for v in parts[1:]]
        if faces.size and (faces.min() < 0 or faces.max() >= n_vertex):
            raise FormatError("face index out of range")
    return {
        "vertices": vertex_rows[:, :3],
        "residuals": vertex_rows[:, 3],
        "faces": faces,
    }


def resolve_output_path(path: str, env_var: str = "WS2R_OUTPUT_DIR") -> str:
    """Resolve an output path, honoring the output-directory override.

    A bare file name (no directory component) lands in $WS2R_OUTPUT_DIR when
    that variable is set; explicit directories are respected as given.
    """
    override = os.environ.get(env_var)
    if override and not os.path.dirname(path):
        return os.path.join(override, path)
    return path
