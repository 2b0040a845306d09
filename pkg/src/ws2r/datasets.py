"""Bundled reference distance sets from the tracked-robot experiments.

Twelve configurations, three per topology category, transcribed verbatim
from the published captions (mm, whole numbers as printed).  d12, d34, d35,
d45 are shared by all twelve; d15/d25 are reference-pose end-effector
distances kept as extras for cross-checking, not part of the geometry.

Note: config 'b' carries the printed value d25 = 3647, which is wildly
inconsistent with the arm's reach; it is preserved as printed and flagged
by the `check` command rather than silently corrected.
"""

from __future__ import annotations

from importlib import resources

from .distances import DistanceSet
from .surface import Topology

_SHARED = dict(d12=58.0, d34=49.0, d35=455.0, d45=460.0)

_SPECIFIC = {
    "a": dict(d13=671.0, d14=670.0, d23=626.0, d24=625.0, d15=1009.0, d25=981.0),
    "b": dict(d13=668.0, d14=656.0, d23=620.0, d24=609.0, d15=385.0, d25=3647.0),
    "c": dict(d13=593.0, d14=618.0, d23=558.0, d24=581.0, d15=726.0, d25=718.0),
    "d": dict(d13=650.0, d14=667.0, d23=603.0, d24=619.0, d15=969.0, d25=930.0),
    "e": dict(d13=523.0, d14=525.0, d23=466.0, d24=469.0, d15=529.0, d25=497.0),
    "f": dict(d13=642.0, d14=669.0, d23=588.0, d24=614.0, d15=551.0, d25=510.0),
    "g": dict(d13=500.0, d14=544.0, d23=451.0, d24=494.0, d15=562.0, d25=520.0),
    "h": dict(d13=569.0, d14=596.0, d23=540.0, d24=564.0, d15=503.0, d25=474.0),
    "i": dict(d13=535.0, d14=581.0, d23=483.0, d24=528.0, d15=647.0, d25=604.0),
    "j": dict(d13=395.0, d14=444.0, d23=343.0, d24=392.0, d15=614.0, d25=572.0),
    "k": dict(d13=511.0, d14=559.0, d23=472.0, d24=520.0, d15=695.0, d25=666.0),
    "l": dict(d13=349.0, d14=396.0, d23=299.0, d24=347.0, d15=443.0, d25=441.0),
}

BUNDLED_NAMES = tuple(f"fig5_{k}" for k in _SPECIFIC)

# Caption category per configuration.
BUNDLED_CATEGORIES = {
    "fig5_a": Topology.GENERAL_ARTICULATED,
    "fig5_b": Topology.GENERAL_ARTICULATED,
    "fig5_c": Topology.GENERAL_ARTICULATED,
    "fig5_d": Topology.PUMA_LIKE,
    "fig5_e": Topology.PUMA_LIKE,
    "fig5_f": Topology.PUMA_LIKE,
    "fig5_g": Topology.SCARA,
    "fig5_h": Topology.SCARA,
    "fig5_i": Topology.SCARA,
    "fig5_j": Topology.SPHERICAL,
    "fig5_k": Topology.SPHERICAL,
    "fig5_l": Topology.SPHERICAL,
}


def bundled_distances(name: str) -> tuple[dict[str, float], dict[str, float]]:
    """(required distances, reference extras) for a bundled config name."""
    key = name.removeprefix("fig5_")
    if key not in _SPECIFIC:
        raise KeyError(f"unknown bundled set {name!r}; have {', '.join(BUNDLED_NAMES)}")
    spec = _SPECIFIC[key]
    required = dict(_SHARED, **{k: v for k, v in spec.items() if k not in ("d15", "d25")})
    extras = {k: spec[k] for k in ("d15", "d25")}
    return required, extras


def bundled_set(name: str) -> tuple[DistanceSet, dict[str, float]]:
    """Bundled DistanceSet plus its reference-pose extras."""
    required, extras = bundled_distances(name)
    ds = DistanceSet.from_distances(
        required["d12"], required["d13"], required["d14"], required["d23"],
        required["d24"], required["d34"], required["d35"], required["d45"])
    return ds, extras


def bundled_file_text(name: str) -> str:
    """Contents of the bundled data file for a config name."""
    key = name.removeprefix("fig5_")
    if key not in _SPECIFIC:
        raise KeyError(f"unknown bundled set {name!r}")
    path = resources.files("ws2r.data").joinpath(f"fig5_{key}.txt")
    return path.read_text()
