from typing import Union

import torch

from fewshape.core.const import BCE_EPS
from fewshape.exceptions import DimensionError
from fewshape.voxels.grid import OccupancyField, VoxelGrid

__all__ = ["bce_loss", "voxel_bce"]


def voxel_bce(
    probabilities: torch.Tensor,
    target: torch.Tensor,
    eps: float = BCE_EPS,
) -> torch.Tensor:
    """Mean voxel binary cross-entropy with probabilities clamped to
    [eps, 1 - eps]."""
    if probabilities.shape != target.shape:
        raise DimensionError(
            "occupancy shape", tuple(target.shape), tuple(probabilities.shape)
        )
    p = probabilities.clamp(eps, 1.0 - eps)
    target = target.to(p.dtype)
    loss = target * torch.log(p) + (1.0 - target) * torch.log1p(-p)
    return -loss.mean()


def bce_loss(
    field: Union[OccupancyField, torch.Tensor],
    target: Union[VoxelGrid, torch.Tensor],
    eps: float = BCE_EPS,
) -> Union[float, torch.Tensor]:
    if isinstance(field, OccupancyField) and isinstance(target, VoxelGrid):
        if field.resolution != target.resolution:
            raise DimensionError(
                "resolution", target.resolution, field.resolution
            )
        value = voxel_bce(
            torch.from_numpy(field.probabilities),
            torch.from_numpy(target.occupancy.astype("float64")),
            eps,
        )
        return float(value)
    if isinstance(field, OccupancyField):
        field = torch.from_numpy(field.probabilities)
    if isinstance(target, VoxelGrid):
        target = torch.from_numpy(target.occupancy.astype("float64"))
    return voxel_bce(field, target, eps)
