"""Command-line interface.

Subcommands: classify, coeffs, sweep, mesh, calibrate, check.  Inputs may
be a bundled configuration name (fig5_a .. fig5_l), a distance-set or
marker file path, or an inline distance list 'd12=58,d13=671,...'.

Exit codes: 0 success, 2 unreadable input, 3 not embeddable, 4 write
failure, 5 declared residual bound exceeded.  Every run is deterministic
for fixed inputs and flags.  The only environment knob is WS2R_OUTPUT_DIR,
which redirects bare output file names into that directory.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import datasets, fileio
from .calibration import distances_from_markers
from .distances import (DistanceSet, ProjectionReport, is_embeddable,
                        project_to_consistency)
from .errors import NotEmbeddable, ResidualBoundExceeded, Ws2rError
from .kinematics import (DEFAULT_DECIMATION, JointLimits, sweep, sweep_blocks,
                         wedge_mask)
from .surface import (DEFAULT_TAU, Topology, classify, extract_coefficients,
                      surface_residual_many)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NOT_EMBEDDABLE = 3
EXIT_WRITE = 4
EXIT_RESIDUAL = 5


@dataclass
class RunConfig:
    """Parsed invocation parameters (exactly one input source)."""

    command: str
    input_spec: str
    tau: float = DEFAULT_TAU
    branch: int = 1
    limits: JointLimits = field(default_factory=JointLimits)
    decimation: int = DEFAULT_DECIMATION
    wedge: tuple[float, float] | None = None
    output: str | None = None
    fmt: str | None = None
    residual_bound: float | None = 1e-6
    markers: bool = False


class InputError(Ws2rError):
    pass


def _parse_wedge(text: str) -> tuple[float, float]:
    try:
        start, end = (float(v) for v in text.split(":"))
    except ValueError as exc:
        raise InputError(f"bad wedge {text!r}; expected START:END degrees") from exc
    if not (0.0 <= start < 360.0):
        raise InputError("wedge start must be in [0, 360)")
    return start, end


def _parse_limits(text: str, step: float) -> JointLimits:
    try:
        a, b, c, d = (float(v) for v in text.split(":"))
    except ValueError as exc:
        raise InputError(f"bad limits {text!r}; expected T1MIN:T1MAX:T2MIN:T2MAX") from exc
    return JointLimits(a, b, c, d, step)


def load_input(cfg: RunConfig) -> tuple[DistanceSet, dict[str, float]]:
    """Resolve the input source to a distance set plus reference extras."""
    spec = cfg.input_spec
    if spec in datasets.BUNDLED_NAMES:
        return datasets.bundled_set(spec)
    if "=" in spec and not os.path.exists(spec):
        return fileio.parse_inline_distances(spec), {}
    if not os.path.exists(spec):
        raise InputError(f"input {spec!r} is neither a bundled name, a file, nor inline distances")
    if cfg.markers or fileio.looks_like_marker_file(spec):
        frame = fileio.load_marker_file(spec)
        ds, diag = distances_from_markers(frame)
        extras = {"d15": math.sqrt(diag["s15"]), "d25": math.sqrt(diag["s25"])}
        return ds, extras
    return fileio.load_distance_file(spec)


def _print_kv(key: str, value) -> None:
    if isinstance(value, float):
        print(f"{key} = {value:.9g}")
    else:
        print(f"{key} = {value}")


def cmd_classify(cfg: RunConfig) -> int:
    ds, _ = load_input(cfg)
    emb, _, report = project_to_consistency(ds, branch=cfg.branch)
    tc = classify(emb, cfg.tau)
    _print_kv("category", tc.category.value)
    _print_kv("tau", tc.tau)
    _print_kv("scale_mm", tc.scale)
    _print_kv("axis_angle_deg", math.degrees(tc.axis_angle))
    _print_kv("common_normal_mm", tc.common_normal)
    if tc.foot_height is not None:
        _print_kv("foot_height_mm", tc.foot_height)
    if tc.category is Topology.SPHERICAL:
        _print_kv("radius_mm", tc.radius)
    elif tc.category is Topology.PUMA_LIKE:
        _print_kv("center_height_mm", tc.center_height)
        _print_kv("radius_mm", tc.radius)
    elif tc.category is Topology.SCARA:
        _print_kv("plane_height_mm", tc.plane_height)
    else:
        _print_kv("tube_radius_mm", tc.tube_radius)
        _print_kv("tube_offset_mm", tc.tube_offset)
        _print_kv("degenerate_tube", tc.degenerate_tube)
    _print_kv("projection_max_delta_mm", report.max_delta_mm)
    return EXIT_OK


def cmd_coeffs(cfg: RunConfig) -> int:
    ds, _ = load_input(cfg)
    _, projected, _ = project_to_consistency(ds, branch=cfg.branch)
    qc = extract_coefficients(projected)
    for key, value in zip(
        ("radial4", "radial2_axial", "planar", "axial2", "axial", "constant"),
        qc.as_array(),
    ):
        _print_kv(key, float(value))
    _print_kv("d12", qc.d12)
    _print_kv("value_scale", qc.value_scale)
    _print_kv("length_scale", qc.length_scale)
    _print_kv("held_out_residual", qc.held_out_residual)
    return EXIT_OK


def _default_output(cfg: RunConfig, suffix: str) -> str:
    base = os.path.basename(cfg.input_spec).split(".")[0] or "workspace"
    if "=" in base:
        base = "workspace"
    return f"{base}_{cfg.command}.{suffix}"


def _open_output(path: str):
    return open(path, "w", newline="\n")


def cmd_sweep(cfg: RunConfig) -> int:
    ds, _ = load_input(cfg)
    emb, projected, report = project_to_consistency(ds, branch=cfg.branch)
    fmt = cfg.fmt or "csv"
    out = fileio.resolve_output_path(cfg.output or _default_output(cfg, fmt))

    if fmt == "csv" and cfg.decimation == 1:
        return _stream_full_sweep(cfg, emb, projected, out, report)

    cloud = sweep(emb, cfg.limits, cfg.decimation,
                  residual_bound=cfg.residual_bound)
    n1, n2 = cloud.grid_shape
    if fmt == "csv":
        cloud = wedge_mask(cloud, cfg.wedge)
        fileio.write_cloud_csv(out, cloud)
        written = len(cloud)
    elif fmt == "ply":
        mesh = fileio.build_mesh(cloud, cfg.wedge)
        fileio.write_mesh_ply(out, mesh)
        written = len(mesh.vertices)
    else:
        raise InputError(f"unknown format {fmt!r}")
    print(f"grid = {n1} x {n2}")
    print(f"points_written = {written}")
    print(f"max_scaled_residual = {cloud.max_residual:.3e}")
    print(f"mean_scaled_residual = {cloud.mean_residual:.3e}")
    print(f"projection_max_delta_mm = {report.max_delta_mm:.6g}")
    print(f"output = {out}")
    return EXIT_OK


def _stream_full_sweep(cfg: RunConfig, emb, projected: DistanceSet, out: str,
                       report: ProjectionReport) -> int:
    """Full-resolution sweep streamed to CSV without materializing the grid."""
    t1, t2 = cfg.limits.grid(1)
    total = 0
    max_res = 0.0
    sum_res = 0.0
    with _open_output(out) as f:
        fileio.write_cloud_csv_header(f)
        for chunk, theta2, pts in sweep_blocks(emb, cfg.limits, 1):
            res = surface_residual_many(projected, pts)
            if cfg.wedge is not None:
                from .kinematics import azimuth_deg
                start, end = cfg.wedge
                span = end - start
                keep = np.mod(azimuth_deg(pts) - start, 360.0) >= span if span else \
                    np.ones(len(pts), dtype=bool)
            else:
                keep = slice(None)
            th1 = np.repeat(chunk, len(theta2))
            th2 = np.tile(theta2, len(chunk))
            fileio.write_cloud_rows(f, th1[keep], th2[keep], pts[keep], res[keep])
            block_abs = np.abs(res)
            max_res = max(max_res, float(block_abs.max(initial=0.0)))
            sum_res += float(block_abs.sum())
            total += pts.shape[0]
    print(f"grid = {len(t1)} x {len(t2)}")
    print(f"points_written = {total}")
    print(f"max_scaled_residual = {max_res:.3e}")
    print(f"mean_scaled_residual = {sum_res / max(total, 1):.3e}")
    print(f"projection_max_delta_mm = {report.max_delta_mm:.6g}")
    print(f"output = {out}")
    if cfg.residual_bound is not None and max_res > cfg.residual_bound:
        raise ResidualBoundExceeded(
            f"max scaled residual {max_res:.3e} > bound {cfg.residual_bound:.3e}")
    return EXIT_OK


def cmd_mesh(cfg: RunConfig) -> int:
    cfg.fmt = cfg.fmt or "ply"
    return cmd_sweep(cfg)


def cmd_calibrate(cfg: RunConfig) -> int:
    if not os.path.exists(cfg.input_spec):
        raise InputError(f"marker file {cfg.input_spec!r} not found")
    frame = fileio.load_marker_file(cfg.input_spec)
    ds, diag = distances_from_markers(frame)
    extras = {"d15": math.sqrt(diag["s15"]), "d25": math.sqrt(diag["s25"])}
    out = fileio.resolve_output_path(cfg.output or _default_output(cfg, "txt"))
    fileio.save_distance_file(out, ds, extras)
    for key, value in sorted(ds.as_distance_dict().items()):
        _print_kv(key + "_mm", value)
    _print_kv("d15_mm", extras["d15"])
    _print_kv("d25_mm", extras["d25"])
    _print_kv("embeddable", bool(is_embeddable(ds)))
    _print_kv("output", out)
    return EXIT_OK


def cmd_check(cfg: RunConfig) -> int:
    ds, extras = load_input(cfg)
    report = is_embeddable(ds)
    _print_kv("embeddable", bool(report))
    if not report:
        _print_kv("first_violation", report.first_violation)
    emb, projected, proj = project_to_consistency(ds, branch=cfg.branch)
    _print_kv("projection_max_delta_mm", proj.max_delta_mm)
    for key, delta in proj.deltas_mm.items():
        if delta > 1e-9:
            _print_kv(f"delta_{key}_mm", delta)
    if extras:
        cloud = sweep(emb, cfg.limits, decimation=64)
        for key, center in (("d15", emb.p1), ("d25", emb.p2)):
            if key not in extras:
                continue
            reach = np.linalg.norm(cloud.points - center, axis=1)
            lo, hi = float(reach.min()), float(reach.max())
            slack = 0.02 * projected.scale
            plausible = lo - slack <= extras[key] <= hi + slack
            _print_kv(f"{key}_reference_mm", extras[key])
            _print_kv(f"{key}_reachable_range_mm", f"{lo:.1f}..{hi:.1f}")
            if not plausible:
                _print_kv(f"{key}_flag", "INCONSISTENT with reachable range")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ws2r",
        description="Workspace analysis of a two-revolute-joint arm from distances.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser, sweepish: bool = False) -> None:
        p.add_argument("input", help="bundled name (fig5_a..fig5_l), file path, or inline d12=..,d13=..")
        p.add_argument("--branch", choices=("positive", "negative"),
                       default="positive", help="mirror branch for the embedding")
        p.add_argument("--markers", action="store_true",
                       help="force treating the input file as a marker file")
        if sweepish:
            p.add_argument("--limits", default=None,
                           help="joint limits T1MIN:T1MAX:T2MIN:T2MAX in degrees")
            p.add_argument("--step", type=float, default=JointLimits().step,
                           help="grid step in degrees (default %(default)s)")
            p.add_argument("--decimation", type=int, default=DEFAULT_DECIMATION,
                           help="step multiplier for desk-scale grids (default %(default)s)")
            p.add_argument("--full", action="store_true",
                           help="full-resolution grid (decimation 1, streamed for CSV)")
            p.add_argument("--wedge", default=None,
                           help="drop points with azimuth in START:END degrees")
            p.add_argument("--format", dest="fmt", choices=("csv", "ply"), default=None)
            p.add_argument("-o", "--output", default=None)
            p.add_argument("--residual-bound", type=float, default=1e-6,
                           help="fail (exit 5) if the max scaled residual exceeds this")

    p = sub.add_parser("classify", help="topology category and canonical parameters")
    add_common(p)
    p.add_argument("--tau", type=float, default=DEFAULT_TAU,
                   help="relative tolerance for the category tests (default %(default)s)")

    p = sub.add_parser("coeffs", help="quartic coefficients in the monomial basis")
    add_common(p)

    p = sub.add_parser("sweep", help="joint-angle sweep cloud (CSV by default)")
    add_common(p, sweepish=True)

    p = sub.add_parser("mesh", help="triangulated sweep mesh (ascii PLY)")
    add_common(p, sweepish=True)

    p = sub.add_parser("calibrate", help="marker file -> distance-set file")
    add_common(p)
    p.add_argument("-o", "--output", default=None)

    p = sub.add_parser("check", help="embeddability and consistency report")
    add_common(p)

    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=args.command, input_spec=args.input)
    cfg.branch = 1 if args.branch == "positive" else -1
    cfg.markers = getattr(args, "markers", False)
    cfg.tau = getattr(args, "tau", DEFAULT_TAU)
    cfg.output = getattr(args, "output", None)
    cfg.fmt = getattr(args, "fmt", None)
    step = getattr(args, "step", JointLimits().step)
    limits_text = getattr(args, "limits", None)
    cfg.limits = _parse_limits(limits_text, step) if limits_text else JointLimits(step=step)
    cfg.decimation = getattr(args, "decimation", DEFAULT_DECIMATION)
    if getattr(args, "full", False):
        cfg.decimation = 1
    wedge_text = getattr(args, "wedge", None)
    cfg.wedge = _parse_wedge(wedge_text) if wedge_text else None
    cfg.residual_bound = getattr(args, "residual_bound", None)
    return cfg


_COMMANDS = {
    "classify": cmd_classify,
    "coeffs": cmd_coeffs,
    "sweep": cmd_sweep,
    "mesh": cmd_mesh,
    "calibrate": cmd_calibrate,
    "check": cmd_check,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _config_from_args(args)
        return _COMMANDS[args.command](cfg)
    except NotEmbeddable as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_EMBEDDABLE
    except ResidualBoundExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESIDUAL
    except (InputError, fileio.FormatError, FileNotFoundError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_WRITE


if __name__ == "__main__":
    sys.exit(main())
