"""Average-shape prior: the voxelwise mean of a class's known shapes is
encoded by a small 3D network and added to the image code."""
import logging
from typing import Sequence

import numpy as np
import torch

from fewshape.core.const import EMBEDDING_DIM, RESOLUTION
from fewshape.core.helpers import numpy_rng
from fewshape.exceptions import DimensionError, ParameterError
from fewshape.nn.shape_encoder import ShapeEncoder
from fewshape.priors.base import ClassTable
from fewshape.priors.registry import ClassRegistry
from fewshape.voxels.grid import OccupancyField, VoxelGrid

__all__ = ["AverageShapePrior", "wallace_prior", "wallace_encode"]

logger = logging.getLogger(__name__)


def wallace_prior(shapes: Sequence[VoxelGrid]) -> OccupancyField:
    """Voxelwise mean occupancy; not thresholded."""
    if not shapes:
        raise ParameterError("shapes", [], "at least one shape is required")
    resolution = shapes[0].resolution
    total = np.zeros((resolution,) * 3, dtype=np.float64)
    for shape in shapes:
        if shape.resolution != resolution:
            raise DimensionError("resolution", resolution, shape.resolution)
        total += shape.occupancy
    return OccupancyField(total / len(shapes))


def wallace_encode(
    prior: OccupancyField, shape_encoder: ShapeEncoder
) -> torch.Tensor:
    if prior.resolution != shape_encoder.resolution:
        raise DimensionError(
            "resolution", shape_encoder.resolution, prior.resolution
        )
    param = next(shape_encoder.parameters())
    x = torch.from_numpy(prior.probabilities).to(param.dtype).unsqueeze(0)
    return shape_encoder(x).squeeze(0)


class AverageShapePrior(ClassTable):
    class_state = ("priors",)

    def __init__(
        self,
        registry: ClassRegistry,
        resolution: int = RESOLUTION,
        dim: int = EMBEDDING_DIM,
        width_scale: float = 1.0,
        single: bool = False,
        seed: int = 0,
        layer_id: str = "embedding",
    ):
        super().__init__(registry, layer_id, seed)
        self.single = single
        self.shape_encoder = ShapeEncoder(resolution, dim, width_scale)
        self.register_buffer(
            "priors", torch.zeros(len(registry), *(resolution,) * 3)
        )

    @property
    def resolution(self) -> int:
        return self.shape_encoder.resolution

    def forward(self, classes: torch.Tensor) -> torch.Tensor:  # type: ignore
        return self.shape_encoder(self.priors[classes])

    def set_class_shapes(
        self, class_id: str, shapes: Sequence[VoxelGrid], seed: int = 0
    ) -> OccupancyField:
        """Store the prior of ``class_id`` built from ``shapes``.

        In ``single`` mode one randomly chosen shape is the prior.
        """
        i = self.registry.index(class_id)
        if self.single and shapes:
            pick = numpy_rng(seed, "single-shape", class_id)
            shapes = [shapes[int(pick.integers(len(shapes)))]]
        prior = wallace_prior(shapes)
        if prior.resolution != self.resolution:
            raise DimensionError(
                "resolution", self.resolution, prior.resolution
            )
        with torch.no_grad():
            self.priors[i] = torch.from_numpy(prior.probabilities).to(
                self.priors.dtype
            )
        logger.debug(
            "Average-shape prior for %s from %d shape(s)",
            class_id,
            len(shapes),
        )
        return prior

    def reinitialize_class(self, class_id: str, seed: int) -> None:
        with torch.no_grad():
            self.priors[self.registry.index(class_id)] = 0.0
