import dataclasses

import numpy as np
import pytest

from fewshape.exceptions import BinvoxFormatError
from fewshape.voxels import (
    VoxelGrid,
    load_binvox,
    read_binvox,
    save_binvox,
    write_binvox,
)
from fewshape.voxels.binvox import rle_encode

from .entities import random_grid

HEADER_32 = (
    b"#binvox 1\ndim 32 32 32\ntranslate 0.0 0.0 0.0\nscale 1.0\ndata\n"
)


def test_all_zero_grid_layout():
    data = write_binvox(VoxelGrid.empty(32))
    assert data.startswith(HEADER_32)
    body = data[len(HEADER_32) :]
    assert body == bytes((0, 255)) * 128 + bytes((0, 128))


def test_rle_splits_long_runs():
    assert rle_encode(np.ones(300, dtype=np.uint8)) == bytes((1, 255, 1, 45))
    assert rle_encode(np.array([0, 0, 1, 0])) == bytes((0, 2, 1, 1, 0, 1))
    assert rle_encode(np.zeros(0)) == b""


def test_round_trip_random_grids():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        grid = random_grid(rng, 32, rng.uniform(0.0, 1.0))
        assert read_binvox(write_binvox(grid)) == grid


def test_round_trip_keeps_translate_and_scale():
    grid = VoxelGrid(
        np.eye(4, dtype=bool)[:, :, None].repeat(4, axis=2),
        translate=(-0.5, 0.25, 1.0),
        scale=0.7,
    )
    decoded = read_binvox(write_binvox(grid))
    assert decoded.translate == (-0.5, 0.25, 1.0)
    assert decoded.scale == 0.7
    assert decoded == grid


def test_header_text_survives_a_round_trip():
    data = (
        b"#binvox 1\ndim 2 2 2\ntranslate 0 0 0\nscale 1\ndata\n"
        + bytes((0, 3, 1, 5))
    )
    grid = read_binvox(data)
    assert grid.translate == (0.0, 0.0, 0.0)
    assert grid.scale == 1.0
    assert grid == VoxelGrid(grid.occupancy)
    assert write_binvox(grid) == data
    moved = dataclasses.replace(grid, scale=2.0)
    assert b"translate 0.0 0.0 0.0\nscale 2.0\n" in write_binvox(moved)


def test_voxel_order_has_y_fastest():
    occ = np.zeros((2, 2, 2), dtype=bool)
    occ[0, 1, 0] = True
    data = write_binvox(VoxelGrid(occ))
    body = data[data.index(b"data\n") + 5 :]
    # x slowest, then z, then y: [0,1,0] is the second voxel
    assert body == bytes((0, 1, 1, 1, 0, 6))


def test_save_and_load(tmp_path):
    grid = random_grid(np.random.default_rng(3), 8)
    path = tmp_path / "nested" / "shape.binvox"
    save_binvox(grid, path)
    assert load_binvox(path) == grid


def test_overrun_is_rejected():
    body = bytes((0, 255)) * 128 + bytes((0, 129))
    with pytest.raises(BinvoxFormatError) as exc_info:
        read_binvox(HEADER_32 + body)
    assert exc_info.value.offset == len(HEADER_32) + 256
    assert "overrun" in exc_info.value.msg


def test_underrun_is_rejected():
    body = bytes((0, 255)) * 128
    with pytest.raises(BinvoxFormatError) as exc_info:
        read_binvox(HEADER_32 + body)
    assert "underrun" in exc_info.value.msg


@pytest.mark.parametrize(
    ["data", "message"],
    [
        (b"#binvox 2\ndim 2 2 2\ndata\n\x00\x08", "bad magic line"),
        (b"#binvox 1\ndim 2 2 3\ndata\n\x00\x08", "dim mismatch"),
        (b"#binvox 1\ndata\n", "missing dim line"),
        (b"#binvox 1\ndim 2 2 2\ndata\n\x00\x00", "zero run length"),
        (b"#binvox 1\ndim 2 2 2\ndata\n\x02\x08", "not in {0, 1}"),
        (b"#binvox 1\ndim 2 2 2\ndata\n\x00\x08\x00", "dangling byte"),
        (b"#binvox 1\ndim 2 2 2", "unterminated header"),
    ],
)
def test_malformed_streams(data, message):
    with pytest.raises(BinvoxFormatError) as exc_info:
        read_binvox(data)
    assert message in str(exc_info.value)
