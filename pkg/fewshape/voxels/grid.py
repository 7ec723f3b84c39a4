from dataclasses import dataclass, field
from typing import Any, Optional, Tuple

import numpy as np

from fewshape.core.const import DEFAULT_THRESHOLD, RESOLUTION
from fewshape.exceptions import DimensionError, ParameterError

__all__ = ["VoxelGrid", "OccupancyField", "threshold"]


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class VoxelGrid:
    """Binary occupancy on an R×R×R lattice, indexed [x, y, z]."""

    occupancy: np.ndarray
    translate: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    scale: float = 1.0
    # translate and scale text as read from a binvox header
    header_reals: Optional[Tuple[str, ...]] = field(
        default=None, compare=False, repr=False
    )
    resolution: int = field(init=False)

    def __post_init__(self) -> None:
        occ = np.asarray(self.occupancy)
        if occ.ndim != 3 or len(set(occ.shape)) != 1:
            raise DimensionError("occupancy shape", "R×R×R", occ.shape)
        if occ.shape[0] < 1:
            raise ParameterError("resolution", occ.shape[0], "must be >= 1")
        if occ.dtype != np.bool_:
            if not np.isin(occ, (0, 1)).all():
                raise ParameterError(
                    "occupancy", occ.dtype, "values must be in {0, 1}"
                )
            occ = occ.astype(np.bool_)
        if not self.scale > 0:
            raise ParameterError("scale", self.scale, "must be positive")
        translate = tuple(float(t) for t in self.translate)
        if len(translate) != 3:
            raise DimensionError("translate", 3, len(translate))
        object.__setattr__(self, "occupancy", _frozen(occ))
        object.__setattr__(self, "translate", translate)
        object.__setattr__(self, "scale", float(self.scale))
        object.__setattr__(self, "resolution", occ.shape[0])

    @classmethod
    def empty(cls, resolution: int = RESOLUTION) -> "VoxelGrid":
        return cls(np.zeros((resolution,) * 3, dtype=np.bool_))

    @classmethod
    def full(cls, resolution: int = RESOLUTION) -> "VoxelGrid":
        return cls(np.ones((resolution,) * 3, dtype=np.bool_))

    @classmethod
    def from_array(cls, a: Any, **kwargs: Any) -> "VoxelGrid":
        return cls(np.asarray(a), **kwargs)

    @property
    def count(self) -> int:
        return int(self.occupancy.sum())

    @property
    def is_empty(self) -> bool:
        return not self.occupancy.any()

    def as_float(self) -> np.ndarray:
        return self.occupancy.astype(np.float32)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, VoxelGrid):
            return NotImplemented
        return (
            self.resolution == other.resolution
            and self.translate == other.translate
            and self.scale == other.scale
            and bool(np.array_equal(self.occupancy, other.occupancy))
        )

    def __hash__(self) -> int:
        return hash((self.resolution, self.occupancy.tobytes()))

    def __repr__(self) -> str:
        return f"VoxelGrid(resolution={self.resolution}, count={self.count})"


@dataclass(frozen=True, eq=False)
class OccupancyField:
    """Per-voxel occupancy probabilities before thresholding."""

    probabilities: np.ndarray
    resolution: int = field(init=False)

    def __post_init__(self) -> None:
        p = np.asarray(self.probabilities, dtype=np.float64)
        if p.ndim != 3 or len(set(p.shape)) != 1:
            raise DimensionError("probabilities shape", "R×R×R", p.shape)
        if not np.isfinite(p).all() or p.min() < 0.0 or p.max() > 1.0:
            raise ParameterError(
                "probabilities", (p.min(), p.max()), "must lie in [0, 1]"
            )
        object.__setattr__(self, "probabilities", _frozen(p))
        object.__setattr__(self, "resolution", p.shape[0])

    @classmethod
    def from_array(cls, a: Any) -> "OccupancyField":
        return cls(np.asarray(a))

    @classmethod
    def from_grid(cls, grid: VoxelGrid) -> "OccupancyField":
        return cls(grid.occupancy.astype(np.float64))

    def __repr__(self) -> str:
        return f"OccupancyField(resolution={self.resolution})"


def threshold(
    f: OccupancyField, t: float = DEFAULT_THRESHOLD
) -> VoxelGrid:
    if not 0.0 < t < 1.0:
        raise ParameterError("t", t, "threshold must lie in (0, 1)")
    return VoxelGrid(f.probabilities >= t)
