import logging
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import torch

from fewshape.core.const import Split
from fewshape.core.helpers import numpy_rng
from fewshape.exceptions import ConfigurationError, ParameterError
from fewshape.synth.dataset import image_to_tensor
from fewshape.synth.manifest import DatasetManifest, ManifestEntry
from fewshape.synth.render import load_image
from fewshape.voxels.binvox import load_binvox
from fewshape.voxels.grid import VoxelGrid

__all__ = ["FewShotEpisode", "make_episode", "load_pairs", "load_shapes"]

logger = logging.getLogger(__name__)


@dataclass
class FewShotEpisode:
    class_id: str
    k: int
    support: List[ManifestEntry]
    query: List[ManifestEntry] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ParameterError("k", self.k, "must be >= 1")
        if len(self.support) != self.k:
            raise ConfigurationError(
                f"Episode for {self.class_id!r} has {len(self.support)} "
                f"support pairs, expected {self.k}"
            )
        for e in self.support + self.query:
            if e.class_id != self.class_id:
                raise ConfigurationError(
                    f"Entry {e.image} belongs to {e.class_id!r}, "
                    f"not {self.class_id!r}"
                )
        overlap = {e.shape for e in self.support} & {
            e.shape for e in self.query
        }
        if overlap:
            raise ConfigurationError(
                f"Support and query share {len(overlap)} shape(s)"
            )


def make_episode(
    manifest: DatasetManifest,
    class_id: str,
    k: int,
    seed: int = 0,
) -> FewShotEpisode:
    """K support pairs from K distinct training shapes of ``class_id``,
    one seeded view each; the query is every test entry of the class."""
    if k < 1:
        raise ParameterError("k", k, "must be >= 1")
    train = manifest.select([class_id], Split.TRAIN)
    by_shape: Dict[str, List[ManifestEntry]] = {}
    for e in train:
        by_shape.setdefault(e.shape, []).append(e)
    if k > len(by_shape):
        raise ParameterError(
            "k", k, f"class {class_id!r} has {len(by_shape)} training shapes"
        )
    rng = numpy_rng(seed, "episode", class_id, k)
    shapes = list(by_shape)
    picked = sorted(rng.choice(len(shapes), size=k, replace=False))
    support = []
    for i in picked:
        views = by_shape[shapes[i]]
        support.append(views[int(rng.integers(len(views)))])
    chosen = {e.shape for e in support}
    query = [
        e
        for e in manifest.select([class_id], Split.TEST)
        if e.shape not in chosen
    ]
    return FewShotEpisode(class_id, k, support, query)


def load_shapes(
    manifest: DatasetManifest, entries: Sequence[ManifestEntry]
) -> List[VoxelGrid]:
    return [load_binvox(manifest.resolve(e.shape)) for e in entries]


def load_pairs(
    manifest: DatasetManifest, entries: Sequence[ManifestEntry]
) -> Tuple[torch.Tensor, torch.Tensor]:
    """Stacked (B, 3, H, W) images and (B, R, R, R) occupancies."""
    if not entries:
        raise ParameterError("entries", [], "at least one entry is required")
    images = [
        image_to_tensor(load_image(manifest.resolve(e.image)))
        for e in entries
    ]
    shapes = [
        torch.from_numpy(g.as_float()) for g in load_shapes(manifest, entries)
    ]
    return torch.stack(images), torch.stack(shapes).float()
