"""Depth-shaded orthographic rendering of voxel grids."""
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np
from mashumaro import DataClassDictMixin
from PIL import Image

from fewshape.config import RecordConfig
from fewshape.core.const import IMAGE_SIZE
from fewshape.core.helpers import numpy_rng
from fewshape.exceptions import ParameterError
from fewshape.types import Interval
from fewshape.voxels.grid import VoxelGrid

__all__ = [
    "RenderParams",
    "Camera",
    "render_views",
    "render",
    "sample_cameras",
    "save_image",
    "load_image",
]

# shade of the farthest possible voxel; background stays 0
FAR_SHADE = 0.25


@dataclass
class RenderParams(DataClassDictMixin):
    azimuth_range: Interval = field(default_factory=lambda: Interval(0, 360))
    elevation_range: Interval = field(
        default_factory=lambda: Interval(25, 30)
    )
    depth_ratio_range: Interval = field(
        default_factory=lambda: Interval(0.65, 1.0)
    )
    image_size: int = IMAGE_SIZE

    class Config(RecordConfig):
        pass

    def __post_init__(self) -> None:
        if self.image_size < 1:
            raise ParameterError("image_size", self.image_size, "must be >= 1")
        if self.depth_ratio_range.low <= 0:
            raise ParameterError(
                "depth_ratio_range",
                self.depth_ratio_range,
                "must be positive",
            )


@dataclass(frozen=True)
class Camera:
    azimuth: float
    elevation: float
    depth_ratio: float


def sample_cameras(params: RenderParams, v: int, seed: int) -> List[Camera]:
    if v < 1:
        raise ParameterError("v", v, "must be >= 1")
    cameras = []
    for k in range(v):
        rng = numpy_rng(seed, "view", k)
        azimuth = params.azimuth_range.sample(rng)
        if params.azimuth_range.as_tuple() == (0.0, 360.0):
            azimuth %= 360.0
        cameras.append(
            Camera(
                azimuth=azimuth,
                elevation=params.elevation_range.sample(rng),
                depth_ratio=params.depth_ratio_range.sample(rng),
            )
        )
    return cameras


def _project(
    grid: VoxelGrid, camera: Camera
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    r = grid.resolution
    idx = np.argwhere(grid.occupancy).astype(np.float64)
    pts = idx + 0.5 - r / 2
    x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]
    az = math.radians(camera.azimuth)
    el = math.radians(camera.elevation)
    x1 = x * math.cos(az) + z * math.sin(az)
    z1 = -x * math.sin(az) + z * math.cos(az)
    y2 = y * math.cos(el) - z1 * math.sin(el)
    z2 = y * math.sin(el) + z1 * math.cos(el)
    return x1, y2, z2


def render(grid: VoxelGrid, camera: Camera, image_size: int) -> np.ndarray:
    """Render ``grid`` into an H×W×3 image with reals in [0, 1]."""
    s = image_size
    image = np.zeros((s, s), dtype=np.float64)
    if grid.is_empty:
        return np.repeat(image[:, :, None], 3, axis=2)
    r = grid.resolution
    half_diag = r * math.sqrt(3) / 2
    px_per_unit = s / (2 * half_diag) * camera.depth_ratio
    u, v, depth = _project(grid, camera)
    cols = s / 2 + u * px_per_unit
    rows = s / 2 - v * px_per_unit
    half = max(1, int(math.ceil(px_per_unit / 2)))
    shade = 1.0 - (1.0 - FAR_SHADE) * (half_diag - depth) / (2 * half_diag)
    zbuf = np.full(s * s, -np.inf)
    color = np.zeros(s * s)
    offsets = np.arange(-half, half) + 0.5
    for dr in offsets:
        for dc in offsets:
            rr = np.floor(rows + dr).astype(np.int64)
            cc = np.floor(cols + dc).astype(np.int64)
            ok = (rr >= 0) & (rr < s) & (cc >= 0) & (cc < s)
            flat = rr[ok] * s + cc[ok]
            d = depth[ok]
            # nearest voxel wins: writes go in increasing depth order
            order = np.argsort(d, kind="stable")
            flat, d, sh = flat[order], d[order], shade[ok][order]
            closer = d > zbuf[flat]
            zbuf[flat[closer]] = d[closer]
            color[flat[closer]] = sh[closer]
    image = color.reshape(s, s)
    return np.repeat(image[:, :, None], 3, axis=2)


def render_views(
    grid: VoxelGrid, params: RenderParams, v: int, seed: int
) -> List[np.ndarray]:
    return [
        render(grid, camera, params.image_size)
        for camera in sample_cameras(params, v, seed)
    ]


def save_image(image: np.ndarray, path: Union[str, Path]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = np.clip(np.round(np.asarray(image) * 255), 0, 255).astype(np.uint8)
    Image.fromarray(data).save(path, format="PNG")


def load_image(path: Union[str, Path]) -> np.ndarray:
    with Image.open(path) as im:
        data = np.asarray(im.convert("RGB"), dtype=np.float32)
    return data / 255.0
