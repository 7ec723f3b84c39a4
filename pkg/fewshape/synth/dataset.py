from functools import lru_cache
from typing import Mapping, Sequence, Tuple

import numpy as np
import torch
from torch.utils.data import Dataset

from fewshape.exceptions import ClassLookupError
from fewshape.synth.manifest import DatasetManifest, ManifestEntry
from fewshape.synth.render import load_image
from fewshape.voxels.binvox import load_binvox
from fewshape.voxels.grid import VoxelGrid

__all__ = ["ShapeImageDataset", "image_to_tensor"]


def image_to_tensor(image: np.ndarray) -> torch.Tensor:
    """H×W×3 reals in [0, 1] to a 3×H×W float tensor."""
    return torch.from_numpy(
        np.ascontiguousarray(np.asarray(image, dtype=np.float32))
    ).permute(2, 0, 1)


class ShapeImageDataset(Dataset):
    """(image, occupancy, class index) triples of manifest entries."""

    def __init__(
        self,
        manifest: DatasetManifest,
        entries: Sequence[ManifestEntry],
        class_index: Mapping[str, int],
    ):
        unknown = sorted({e.class_id for e in entries} - set(class_index))
        if unknown:
            raise ClassLookupError(unknown, "No class index for")
        self.manifest = manifest
        self.entries = list(entries)
        self.class_index = dict(class_index)
        self._load_shape = lru_cache(maxsize=None)(self._read_shape)

    def _read_shape(self, relative: str) -> VoxelGrid:
        return load_binvox(self.manifest.resolve(relative))

    def shape(self, i: int) -> VoxelGrid:
        return self._load_shape(self.entries[i].shape)

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, i: int) -> Tuple[torch.Tensor, torch.Tensor, int]:
        entry = self.entries[i]
        image = image_to_tensor(load_image(self.manifest.resolve(entry.image)))
        occupancy = torch.from_numpy(self.shape(i).as_float())
        return image, occupancy, self.class_index[entry.class_id]
