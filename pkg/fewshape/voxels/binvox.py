"""Reader and writer for the binvox version 1 voxel format.

The data section stores voxels with x varying slowest, then z, then y
fastest, as (value, count) byte pairs with 1 <= count <= 255.
``VoxelGrid.occupancy`` is indexed [x, y, z], so both directions transpose
the last two axes.
"""
import logging
from pathlib import Path
from typing import Dict, List, Tuple, Union

import numpy as np

from fewshape.exceptions import BinvoxFormatError
from fewshape.voxels.grid import VoxelGrid

__all__ = [
    "read_binvox",
    "write_binvox",
    "load_binvox",
    "save_binvox",
    "rle_encode",
]

logger = logging.getLogger(__name__)

MAGIC = b"#binvox 1"
MAX_RUN = 255


def _format_real(x: float) -> str:
    return repr(float(x))


def _header_reals(grid: VoxelGrid) -> Tuple[str, ...]:
    values = (*grid.translate, grid.scale)
    raw = grid.header_reals
    # text read from a file is kept while it still parses to the values
    if raw is not None and len(raw) == 4:
        try:
            if tuple(float(v) for v in raw) == values:
                return raw
        except ValueError:
            pass
    return tuple(_format_real(v) for v in values)


def rle_encode(flat: np.ndarray) -> bytes:
    flat = np.asarray(flat, dtype=np.uint8).reshape(-1)
    if flat.size == 0:
        return b""
    change = np.flatnonzero(np.diff(flat)) + 1
    starts = np.concatenate(([0], change))
    lengths = np.diff(np.concatenate((starts, [flat.size])))
    values = flat[starts]
    out = bytearray()
    for value, length in zip(values.tolist(), lengths.tolist()):
        full, rest = divmod(length, MAX_RUN)
        out += bytes((value, MAX_RUN)) * full
        if rest:
            out += bytes((value, rest))
    return bytes(out)


def write_binvox(grid: VoxelGrid) -> bytes:
    r = grid.resolution
    tx, ty, tz, scale = _header_reals(grid)
    header = (
        f"{MAGIC.decode()}\n"
        f"dim {r} {r} {r}\n"
        f"translate {tx} {ty} {tz}\n"
        f"scale {scale}\n"
        "data\n"
    ).encode("ascii")
    flat = np.transpose(grid.occupancy, (0, 2, 1)).reshape(-1)
    return header + rle_encode(flat)


def _parse_header(data: bytes) -> Tuple[Dict[str, List[bytes]], int]:
    offset = 0
    fields: Dict[str, List[bytes]] = {}
    first = True
    while True:
        end = data.find(b"\n", offset)
        if end < 0:
            raise BinvoxFormatError(offset, "unterminated header line")
        line = data[offset:end].strip()
        if first:
            if line != MAGIC:
                raise BinvoxFormatError(offset, f"bad magic line {line!r}")
            first = False
        elif line == b"data":
            return fields, end + 1
        elif line:
            key, *values = line.split()
            fields[key.decode("ascii", "replace")] = values
        offset = end + 1


def _parse_reals(
    fields: Dict[str, List[bytes]], key: str, n: int, offset: int
) -> List[float]:
    if key not in fields:
        return [0.0] * n if key == "translate" else [1.0]
    try:
        values = [float(v) for v in fields[key]]
    except ValueError:
        raise BinvoxFormatError(offset, f"non-numeric {key} values")
    if len(values) != n:
        raise BinvoxFormatError(
            offset, f"{key} expects {n} values, got {len(values)}"
        )
    return values


def read_binvox(data: bytes) -> VoxelGrid:
    data = bytes(data)
    fields, data_start = _parse_header(data)
    if "dim" not in fields:
        raise BinvoxFormatError(data_start, "missing dim line")
    try:
        dims = [int(d) for d in fields["dim"]]
    except ValueError:
        raise BinvoxFormatError(0, "non-integer dim values")
    if len(dims) != 3 or len(set(dims)) != 1 or dims[0] < 1:
        raise BinvoxFormatError(0, f"dim mismatch {dims}")
    r = dims[0]
    translate = _parse_reals(fields, "translate", 3, 0)
    (scale,) = _parse_reals(fields, "scale", 1, 0)

    raw = np.frombuffer(data, dtype=np.uint8, offset=data_start)
    if raw.size % 2:
        raise BinvoxFormatError(
            len(data) - 1, "dangling byte after last run-length pair"
        )
    values, counts = raw[0::2], raw[1::2].astype(np.int64)
    bad_count = np.flatnonzero(counts == 0)
    if bad_count.size:
        raise BinvoxFormatError(
            data_start + 2 * int(bad_count[0]) + 1, "zero run length"
        )
    bad_value = np.flatnonzero(values > 1)
    if bad_value.size:
        raise BinvoxFormatError(
            data_start + 2 * int(bad_value[0]), "voxel value not in {0, 1}"
        )
    total = r**3
    ends = np.cumsum(counts)
    if ends.size == 0 or ends[-1] < total:
        decoded = int(ends[-1]) if ends.size else 0
        raise BinvoxFormatError(
            len(data), f"underrun: decoded {decoded} of {total} voxels"
        )
    if ends[-1] > total:
        pair = int(np.searchsorted(ends, total, side="right"))
        raise BinvoxFormatError(
            data_start + 2 * pair,
            f"overrun: decoded {int(ends[-1])} of {total} voxels",
        )
    flat = np.repeat(values.astype(np.bool_), counts)
    occupancy = np.transpose(flat.reshape(r, r, r), (0, 2, 1))
    raw = None
    if "translate" in fields and "scale" in fields:
        raw = tuple(
            v.decode("ascii") for v in fields["translate"] + fields["scale"]
        )
    return VoxelGrid(
        occupancy,
        translate=tuple(translate),  # type: ignore
        scale=scale,
        header_reals=raw,
    )


def load_binvox(path: Union[str, Path]) -> VoxelGrid:
    return read_binvox(Path(path).read_bytes())


def save_binvox(grid: VoxelGrid, path: Union[str, Path]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(write_binvox(grid))
    logger.debug("wrote %s (%d occupied voxels)", path, grid.count)
