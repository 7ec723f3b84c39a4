from typing import List

import numpy as np

from fewshape.core.const import Role
from fewshape.model import ModelConfig
from fewshape.priors.registry import ClassRegistry
from fewshape.priors.variants import PriorKind
from fewshape.synth.families import Family, SynthClassSpec
from fewshape.synth.render import RenderParams
from fewshape.types import Interval
from fewshape.voxels.grid import VoxelGrid

TINY_RESOLUTION = 16
TINY_IMAGE_SIZE = 64


def spec(class_id, family, role=Role.BASE, **ranges) -> SynthClassSpec:
    return SynthClassSpec(
        class_id=class_id,
        family=family,
        param_ranges={k: Interval(*v) for k, v in ranges.items()},
        role=role,
    )


def tiny_specs() -> List[SynthClassSpec]:
    """Two base and two novel classes that fit a 16³ lattice."""
    return [
        spec("can", Family.CYLINDER, radius=(2, 5), height=(4, 12)),
        spec(
            "stack",
            Family.BOX_STACK,
            levels=(1, 3),
            width=(3, 10),
            height=(2, 4),
        ),
        spec(
            "ring",
            Family.RING,
            Role.NOVEL,
            outer_radius=(4, 7),
            thickness=(1, 3),
            height=(2, 6),
        ),
        spec(
            "bracket",
            Family.L_BRACKET,
            Role.NOVEL,
            arm_length=(6, 12),
            arm_thickness=(2, 4),
            depth=(3, 8),
        ),
    ]


def tiny_render() -> RenderParams:
    return RenderParams(image_size=TINY_IMAGE_SIZE)


def random_grid(
    rng: np.random.Generator, resolution: int, density: float = 0.3
) -> VoxelGrid:
    return VoxelGrid(rng.random((resolution,) * 3) < density)


def block(resolution: int, lo, size) -> VoxelGrid:
    occ = np.zeros((resolution,) * 3, dtype=np.bool_)
    x, y, z = lo
    sx, sy, sz = size
    occ[x : x + sx, y : y + sy, z : z + sz] = True
    return VoxelGrid(occ)


def tiny_config(variant: PriorKind = PriorKind.NONE, **kwargs) -> ModelConfig:
    return ModelConfig(
        variant=variant,
        image_size=TINY_IMAGE_SIZE,
        resolution=TINY_RESOLUTION,
        embedding_dim=64,
        width_scale=0.125,
        **kwargs,
    )


def tiny_registry() -> ClassRegistry:
    return ClassRegistry(["can", "stack"], ["ring", "bracket"])
