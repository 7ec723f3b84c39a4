"""Parametric primitive compositions on the voxel lattice.

All lengths are in voxel units and shapes are centered on the lattice.
Every family builds its shape from axis-aligned boxes and vertical
cylinders, each checked against the lattice bounds.
"""
import enum
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np
from mashumaro import DataClassDictMixin

from fewshape.config import RecordConfig
from fewshape.core.const import RESOLUTION, Role
from fewshape.core.helpers import numpy_rng
from fewshape.exceptions import (
    ConfigurationError,
    GenerationError,
    ParameterError,
)
from fewshape.types import Interval
from fewshape.voxels.grid import VoxelGrid

__all__ = [
    "Family",
    "SynthClassSpec",
    "FAMILY_PARAMETERS",
    "generate_class",
    "generate_shape",
    "sample_parameters",
]


class Family(str, enum.Enum):
    BOX_STACK = "box-stack"
    TABLE_LIKE = "table-like"
    CYLINDER = "cylinder"
    L_BRACKET = "L-bracket"
    WING_BODY = "wing-body"
    RING = "ring"


# parameters sampled once per shape; "width" of a box stack is sampled per
# level
FAMILY_PARAMETERS: Dict[Family, Tuple[str, ...]] = {
    Family.BOX_STACK: ("levels", "width", "height"),
    Family.TABLE_LIKE: (
        "top_width",
        "top_depth",
        "top_thickness",
        "leg_height",
        "leg_thickness",
    ),
    Family.CYLINDER: ("radius", "height"),
    Family.L_BRACKET: ("arm_length", "arm_thickness", "depth"),
    Family.WING_BODY: (
        "body_length",
        "body_radius",
        "wing_span",
        "wing_chord",
        "wing_thickness",
    ),
    Family.RING: ("outer_radius", "thickness", "height"),
}


@dataclass
class SynthClassSpec(DataClassDictMixin):
    class_id: str
    family: Family
    param_ranges: Dict[str, Interval]
    seed: int = 0
    role: Role = Role.BASE

    class Config(RecordConfig):
        pass

    def __post_init__(self) -> None:
        if not self.param_ranges:
            raise ConfigurationError(
                f'Class "{self.class_id}" has no parameter ranges'
            )
        expected = set(FAMILY_PARAMETERS[self.family])
        given = set(self.param_ranges)
        unknown = sorted(given - expected)
        if unknown:
            raise GenerationError(
                self.class_id,
                unknown[0],
                f"not a {self.family.value} parameter",
            )
        missing = sorted(expected - given)
        if missing:
            raise GenerationError(
                self.class_id, missing[0], "range is missing"
            )


@dataclass
class _Canvas:
    class_id: str
    resolution: int
    occupancy: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        self.occupancy = np.zeros((self.resolution,) * 3, dtype=np.bool_)

    def _span(self, center: float, size: float, param: str) -> slice:
        n = int(round(size))
        if n < 1:
            raise GenerationError(
                self.class_id, param, f"extent {size:.3g} rounds below 1"
            )
        lo = int(round(center - n / 2))
        if lo < 0 or lo + n > self.resolution:
            raise GenerationError(
                self.class_id,
                param,
                f"extent [{lo}, {lo + n}) leaves the "
                f"{self.resolution}^3 lattice",
            )
        return slice(lo, lo + n)

    def box(
        self,
        center: Tuple[float, float, float],
        size: Tuple[float, float, float],
        params: Tuple[str, str, str],
    ) -> None:
        sx, sy, sz = (
            self._span(c, s, p) for c, s, p in zip(center, size, params)
        )
        self.occupancy[sx, sy, sz] = True

    def cylinder(
        self,
        center_xz: Tuple[float, float],
        radius: float,
        y_center: float,
        height: float,
        params: Tuple[str, str],
        inner_radius: float = 0.0,
    ) -> None:
        r_param, h_param = params
        sx = self._span(center_xz[0], 2 * radius, r_param)
        sz = self._span(center_xz[1], 2 * radius, r_param)
        sy = self._span(y_center, height, h_param)
        xs = np.arange(sx.start, sx.stop) + 0.5 - center_xz[0]
        zs = np.arange(sz.start, sz.stop) + 0.5 - center_xz[1]
        d2 = xs[:, None] ** 2 + zs[None, :] ** 2
        disk = (d2 <= radius**2) & (d2 >= inner_radius**2)
        if not disk.any():
            raise GenerationError(
                self.class_id, r_param, "empty cross-section"
            )
        block = self.occupancy[sx, sy, sz]
        block |= disk[:, None, :]
        self.occupancy[sx, sy, sz] = block


def _box_stack(
    c: _Canvas, p: Dict[str, float], widths: List[float]
) -> None:
    mid = c.resolution / 2
    levels = len(widths)
    height = p["height"]
    y = mid - levels * round(height) / 2 + round(height) / 2
    for w in widths:
        c.box((mid, y, mid), (w, height, w), ("width", "height", "width"))
        y += round(height)


def _table_like(c: _Canvas, p: Dict[str, float]) -> None:
    mid = c.resolution / 2
    w, d = p["top_width"], p["top_depth"]
    t, lh, lt = p["top_thickness"], p["leg_height"], p["leg_thickness"]
    total = round(t) + round(lh)
    base_y = mid - total / 2
    c.box(
        (mid, base_y + round(lh) + round(t) / 2, mid),
        (w, t, d),
        ("top_width", "top_thickness", "top_depth"),
    )
    dx = round(w) / 2 - round(lt) / 2
    dz = round(d) / 2 - round(lt) / 2
    for sx in (-1, 1):
        for sz in (-1, 1):
            c.box(
                (mid + sx * dx, base_y + round(lh) / 2, mid + sz * dz),
                (lt, lh, lt),
                ("leg_thickness", "leg_height", "leg_thickness"),
            )


def _cylinder(c: _Canvas, p: Dict[str, float]) -> None:
    mid = c.resolution / 2
    c.cylinder(
        (mid, mid), p["radius"], mid, p["height"], ("radius", "height")
    )


def _l_bracket(c: _Canvas, p: Dict[str, float]) -> None:
    mid = c.resolution / 2
    a, t, d = p["arm_length"], p["arm_thickness"], p["depth"]
    x0 = mid - round(a) / 2
    y0 = mid - round(a) / 2
    # horizontal arm along x, vertical arm along y, sharing the corner
    c.box(
        (x0 + round(a) / 2, y0 + round(t) / 2, mid),
        (a, t, d),
        ("arm_length", "arm_thickness", "depth"),
    )
    c.box(
        (x0 + round(t) / 2, y0 + round(a) / 2, mid),
        (t, a, d),
        ("arm_thickness", "arm_length", "depth"),
    )


def _wing_body(c: _Canvas, p: Dict[str, float]) -> None:
    mid = c.resolution / 2
    r = p["body_radius"]
    c.box(
        (mid, mid, mid),
        (p["body_length"], 2 * r, 2 * r),
        ("body_length", "body_radius", "body_radius"),
    )
    c.box(
        (mid, mid, mid),
        (p["wing_chord"], p["wing_thickness"], p["wing_span"]),
        ("wing_chord", "wing_thickness", "wing_span"),
    )


def _ring(c: _Canvas, p: Dict[str, float]) -> None:
    mid = c.resolution / 2
    outer = p["outer_radius"]
    inner = max(outer - p["thickness"], 0.0)
    c.cylinder(
        (mid, mid),
        outer,
        mid,
        p["height"],
        ("outer_radius", "height"),
        inner_radius=inner,
    )


def sample_parameters(
    spec: SynthClassSpec, rng: np.random.Generator
) -> Dict[str, float]:
    return {
        name: spec.param_ranges[name].sample(rng)
        for name in FAMILY_PARAMETERS[spec.family]
    }


def generate_shape(
    spec: SynthClassSpec,
    rng: np.random.Generator,
    resolution: int = RESOLUTION,
) -> VoxelGrid:
    p = sample_parameters(spec, rng)
    canvas = _Canvas(spec.class_id, resolution)
    if spec.family is Family.BOX_STACK:
        levels = int(round(p["levels"]))
        if levels < 1:
            raise GenerationError(spec.class_id, "levels", "must be >= 1")
        widths = [p["width"]] + [
            spec.param_ranges["width"].sample(rng) for _ in range(levels - 1)
        ]
        _box_stack(canvas, p, widths)
    elif spec.family is Family.TABLE_LIKE:
        _table_like(canvas, p)
    elif spec.family is Family.CYLINDER:
        _cylinder(canvas, p)
    elif spec.family is Family.L_BRACKET:
        _l_bracket(canvas, p)
    elif spec.family is Family.WING_BODY:
        _wing_body(canvas, p)
    else:
        _ring(canvas, p)
    if not canvas.occupancy.any():
        raise GenerationError(
            spec.class_id, FAMILY_PARAMETERS[spec.family][0], "empty shape"
        )
    return VoxelGrid(canvas.occupancy)


def generate_class(
    spec: SynthClassSpec,
    n: int,
    seed: int,
    resolution: int = RESOLUTION,
) -> List[VoxelGrid]:
    if n < 1:
        raise ParameterError("n", n, "must be >= 1")
    return [
        generate_shape(
            spec, numpy_rng(seed, spec.seed, spec.class_id, i), resolution
        )
        for i in range(n)
    ]
