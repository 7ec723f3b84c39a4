from dataclasses import dataclass
from typing import Dict, List, Mapping, Sequence

import numpy as np

from fewshape.exceptions import DimensionError, ParameterError
from fewshape.voxels.grid import VoxelGrid

__all__ = [
    "iou",
    "iou_many",
    "proximity_shape",
    "proximity_class",
    "intra_class_diversity",
    "proximity_matrix",
    "ProximityMatrix",
]


def _check_resolution(a: VoxelGrid, b: VoxelGrid) -> None:
    if a.resolution != b.resolution:
        raise DimensionError("resolution", a.resolution, b.resolution)


def iou(a: VoxelGrid, b: VoxelGrid) -> float:
    _check_resolution(a, b)
    union = np.count_nonzero(a.occupancy | b.occupancy)
    if union == 0:
        # both grids empty
        return 1.0
    inter = np.count_nonzero(a.occupancy & b.occupancy)
    return inter / union


def iou_many(query: VoxelGrid, pool: Sequence[VoxelGrid]) -> np.ndarray:
    """IoU of one grid against every grid of ``pool``."""
    if not pool:
        return np.zeros(0)
    for g in pool:
        _check_resolution(query, g)
    q = query.occupancy.reshape(-1)
    stack = np.stack([g.occupancy.reshape(-1) for g in pool])
    inter = np.count_nonzero(stack & q, axis=1)
    union = np.count_nonzero(stack | q, axis=1)
    out = np.ones(len(pool))
    nz = union > 0
    out[nz] = inter[nz] / union[nz]
    return out


def proximity_shape(s: VoxelGrid, base: Sequence[VoxelGrid]) -> float:
    if len(base) == 0:
        raise ParameterError("base", base, "must be nonempty")
    return float(iou_many(s, list(base)).max())


def proximity_class(
    c: Sequence[VoxelGrid], base: Sequence[VoxelGrid]
) -> float:
    if len(c) == 0:
        raise ParameterError("C", c, "must be nonempty")
    if len(base) == 0:
        raise ParameterError("base", base, "must be nonempty")
    base = list(base)
    return float(np.mean([proximity_shape(s, base) for s in c]))


def intra_class_diversity(c: Sequence[VoxelGrid]) -> float:
    """One minus the mean IoU of each shape with its nearest other member
    of ``c``; 0 when every shape has an identical partner."""
    if len(c) < 2:
        raise ParameterError("C", len(c), "needs at least two shapes")
    shapes = list(c)
    nearest = [
        float(np.delete(iou_many(s, shapes), i).max())
        for i, s in enumerate(shapes)
    ]
    return 1.0 - float(np.mean(nearest))


@dataclass
class ProximityMatrix:
    base_classes: List[str]
    novel_classes: List[str]
    values: np.ndarray  # base × novel

    def closest_base(self, novel_class: str) -> str:
        col = self.values[:, self.novel_classes.index(novel_class)]
        return self.base_classes[int(np.argmax(col))]

    def best_base_proximity(self) -> Dict[str, float]:
        return {
            c: float(self.values[:, j].max())
            for j, c in enumerate(self.novel_classes)
        }


def proximity_matrix(
    base: Mapping[str, Sequence[VoxelGrid]],
    novel: Mapping[str, Sequence[VoxelGrid]],
) -> ProximityMatrix:
    base_ids = list(base)
    novel_ids = list(novel)
    values = np.zeros((len(base_ids), len(novel_ids)))
    for i, b in enumerate(base_ids):
        for j, n in enumerate(novel_ids):
            values[i, j] = proximity_class(novel[n], base[b])
    return ProximityMatrix(base_ids, novel_ids, values)
