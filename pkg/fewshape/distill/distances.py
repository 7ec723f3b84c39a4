"""Pairwise 1 - IoU shape distances and their on-disk cache."""
import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import msgpack
import numpy as np

from fewshape.core.helpers import content_hash
from fewshape.exceptions import DimensionError, ParameterError
from fewshape.voxels.grid import VoxelGrid

__all__ = ["DistanceMatrix", "pairwise_distances", "DistanceCache"]

logger = logging.getLogger(__name__)

BLOCK_SIZE = 256


@dataclass(frozen=True)
class DistanceMatrix:
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise DimensionError("distance matrix shape", "(n, n)", v.shape)
        if not np.array_equal(v, v.T):
            raise ParameterError("values", "asymmetric", "must be symmetric")
        if np.any(np.diag(v) != 0):
            raise ParameterError("values", "diagonal", "must be zero")
        if v.size and (v.min() < 0 or v.max() > 1):
            raise ParameterError("values", "range", "must lie in [0, 1]")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def __getitem__(self, index: object) -> np.ndarray:
        return self.values[index]  # type: ignore[index]

    def submatrix(self, indices: Sequence[int]) -> "DistanceMatrix":
        idx = np.asarray(indices, dtype=np.intp)
        return DistanceMatrix(self.values[np.ix_(idx, idx)])

    def lower_triangle(self) -> np.ndarray:
        return self.values[np.tril_indices(self.n, -1)]

    @classmethod
    def from_lower_triangle(
        cls, n: int, packed: np.ndarray
    ) -> "DistanceMatrix":
        rows, cols = np.tril_indices(n, -1)
        if packed.size != rows.size:
            raise DimensionError(
                "packed triangle length", rows.size, packed.size
            )
        v = np.zeros((n, n), dtype=np.float64)
        v[rows, cols] = packed
        v[cols, rows] = packed
        return cls(v)


def _flat(shapes: Sequence[VoxelGrid]) -> np.ndarray:
    resolution = shapes[0].resolution
    for s in shapes:
        if s.resolution != resolution:
            raise DimensionError("resolution", resolution, s.resolution)
    return np.stack([s.occupancy.reshape(-1) for s in shapes]).astype(
        np.float32
    )


def pairwise_distances(
    shapes: Sequence[VoxelGrid], block_size: int = BLOCK_SIZE
) -> DistanceMatrix:
    """1 - IoU for every shape pair, computed in row blocks."""
    if not shapes:
        return DistanceMatrix(np.zeros((0, 0)))
    flat = _flat(shapes)
    counts = flat.sum(axis=1, dtype=np.float64)
    n = len(shapes)
    out = np.zeros((n, n), dtype=np.float64)
    for start in range(0, n, block_size):
        stop = min(start + block_size, n)
        # voxel counts are exact in float32 up to 2^24
        inter = (flat[start:stop] @ flat.T).astype(np.float64)
        union = counts[start:stop, None] + counts[None, :] - inter
        with np.errstate(invalid="ignore", divide="ignore"):
            sim = np.where(union > 0, inter / union, 1.0)
        out[start:stop] = 1.0 - sim
    out = np.minimum(out, out.T)
    np.fill_diagonal(out, 0.0)
    return DistanceMatrix(out)


class DistanceCache:
    """Distance matrices on disk, keyed by a content hash of the shapes.

    A file holds a msgpack header ``{n, resolution, hash}`` followed by the
    row-major strict lower triangle as little-endian float32. Cached values
    are float32-rounded, and so is every matrix this cache hands out.
    """

    suffix = ".dist"

    def __init__(self, directory: Union[str, Path]):
        self.directory = Path(directory)

    def path_for(self, key: str) -> Path:
        return self.directory / f"{key}{self.suffix}"

    @staticmethod
    def key(shapes: Sequence[VoxelGrid]) -> str:
        return content_hash(s.occupancy for s in shapes)

    def _write(
        self, path: Path, resolution: int, key: str, d: DistanceMatrix
    ) -> None:
        header = msgpack.packb(
            {"n": d.n, "resolution": resolution, "hash": key}
        )
        body = msgpack.packb(
            d.lower_triangle().astype("<f4").tobytes(), use_bin_type=True
        )
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_name(f"{path.name}.{os.getpid()}.tmp")
        tmp.write_bytes(header + body)
        os.replace(tmp, path)

    def read(self, path: Union[str, Path]) -> Optional[DistanceMatrix]:
        path = Path(path)
        if not path.exists():
            return None
        unpacker = msgpack.Unpacker(raw=False)
        unpacker.feed(path.read_bytes())
        try:
            header = next(unpacker)
            body = next(unpacker)
        except (StopIteration, ValueError, msgpack.UnpackException):
            logger.warning("Ignoring unreadable distance cache %s", path)
            return None
        packed = np.frombuffer(body, dtype="<f4").astype(np.float64)
        try:
            return DistanceMatrix.from_lower_triangle(header["n"], packed)
        except (DimensionError, ParameterError, KeyError):
            logger.warning("Ignoring inconsistent distance cache %s", path)
            return None

    def get(
        self, shapes: Sequence[VoxelGrid], block_size: int = BLOCK_SIZE
    ) -> DistanceMatrix:
        key = self.key(shapes)
        path = self.path_for(key)
        cached = self.read(path)
        if cached is not None and cached.n == len(shapes):
            logger.debug("Distance cache hit %s", path)
            return cached
        d = pairwise_distances(shapes, block_size)
        resolution = shapes[0].resolution if shapes else 0
        self._write(path, resolution, key, d)
        logger.debug("Distance cache miss, wrote %s", path)
        return DistanceMatrix.from_lower_triangle(
            d.n, d.lower_triangle().astype("<f4").astype(np.float64)
        )
