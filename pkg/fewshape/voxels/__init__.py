from fewshape.voxels.binvox import (
    load_binvox,
    read_binvox,
    save_binvox,
    write_binvox,
)
from fewshape.voxels.grid import OccupancyField, VoxelGrid, threshold
from fewshape.voxels.metrics import (
    ProximityMatrix,
    intra_class_diversity,
    iou,
    iou_many,
    proximity_class,
    proximity_matrix,
    proximity_shape,
)

__all__ = [
    "VoxelGrid",
    "OccupancyField",
    "threshold",
    "iou",
    "iou_many",
    "proximity_shape",
    "proximity_class",
    "intra_class_diversity",
    "proximity_matrix",
    "ProximityMatrix",
    "read_binvox",
    "write_binvox",
    "load_binvox",
    "save_binvox",
]
