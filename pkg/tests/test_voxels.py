import numpy as np
import pytest

from fewshape.exceptions import DimensionError, ParameterError
from fewshape.voxels import (
    OccupancyField,
    VoxelGrid,
    intra_class_diversity,
    iou,
    iou_many,
    proximity_class,
    proximity_matrix,
    proximity_shape,
    threshold,
)

from .entities import block, random_grid
from .utils import brute_force_iou


def test_grid_validation():
    with pytest.raises(DimensionError):
        VoxelGrid(np.zeros((4, 4, 5), dtype=bool))
    with pytest.raises(ParameterError):
        VoxelGrid(np.full((2, 2, 2), 2))
    with pytest.raises(ParameterError):
        VoxelGrid(np.zeros((2, 2, 2), dtype=bool), scale=0.0)
    grid = VoxelGrid.from_array(np.ones((2, 2, 2), dtype=np.int64))
    assert grid.occupancy.dtype == np.bool_
    assert grid.count == 8
    assert not grid.occupancy.flags.writeable


def test_iou_identity_and_disjoint():
    g = block(8, (1, 1, 1), (3, 3, 3))
    assert iou(g, g) == 1.0
    assert iou(g, block(8, (5, 5, 5), (2, 2, 2))) == 0.0


def test_iou_shifted_block_is_one_third():
    a = block(8, (0, 0, 0), (2, 2, 2))
    b = block(8, (1, 0, 0), (2, 2, 2))
    assert iou(a, b) == pytest.approx(1 / 3)


def test_iou_degenerate_grids():
    empty = VoxelGrid.empty(4)
    assert iou(empty, empty) == 1.0
    assert iou(empty, VoxelGrid.full(4)) == 0.0


def test_iou_resolution_mismatch():
    with pytest.raises(DimensionError):
        iou(VoxelGrid.empty(4), VoxelGrid.empty(8))


def test_iou_matches_brute_force():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        density = rng.uniform(0.0, 0.6)
        a = random_grid(rng, 8, density)
        b = random_grid(rng, 8, density)
        assert iou(a, b) == brute_force_iou(a.occupancy, b.occupancy)


def test_iou_many_matches_iou():
    rng = np.random.default_rng(1)
    query = random_grid(rng, 6)
    pool = [random_grid(rng, 6) for _ in range(5)] + [VoxelGrid.empty(6)]
    expected = [iou(query, g) for g in pool]
    assert iou_many(query, pool).tolist() == expected
    assert iou_many(query, []).size == 0


def test_threshold_uses_greater_or_equal():
    assert threshold(OccupancyField(np.full((3, 3, 3), 0.9)), 0.5).count == 27
    assert threshold(OccupancyField(np.full((3, 3, 3), 0.5)), 0.5).count == 27
    p = np.zeros((3, 3, 3))
    p[0, 0, :] = (0.49, 0.5, 0.51)
    grid = threshold(OccupancyField(p), 0.5)
    assert grid.occupancy[0, 0, :].tolist() == [False, True, True]


def test_threshold_is_monotone():
    rng = np.random.default_rng(2)
    field = OccupancyField(rng.random((6, 6, 6)))
    ts = np.sort(rng.uniform(0.01, 0.99, size=25))
    grids = [threshold(field, float(t)).occupancy for t in ts]
    for low, high in zip(grids, grids[1:]):
        assert not (high & ~low).any()


@pytest.mark.parametrize("t", [0.0, 1.0, -0.1, 1.5])
def test_threshold_range(t):
    with pytest.raises(ParameterError):
        threshold(OccupancyField(np.zeros((2, 2, 2))), t)


def test_occupancy_field_range():
    with pytest.raises(ParameterError):
        OccupancyField(np.full((2, 2, 2), 1.5))
    with pytest.raises(ParameterError):
        OccupancyField(np.full((2, 2, 2), np.nan))


def test_proximity_shape():
    a = block(8, (0, 0, 0), (2, 2, 2))
    b = block(8, (1, 0, 0), (2, 2, 2))
    far = block(8, (5, 5, 5), (2, 2, 2))
    assert proximity_shape(a, [a, far]) == 1.0
    assert proximity_shape(b, [a, far]) == pytest.approx(1 / 3)
    assert proximity_shape(b, [far]) == iou(b, far)
    with pytest.raises(ParameterError):
        proximity_shape(a, [])


def test_proximity_class():
    a = block(8, (0, 0, 0), (2, 2, 2))
    b = block(8, (1, 0, 0), (2, 2, 2))
    far = block(8, (5, 5, 5), (2, 2, 2))
    assert proximity_class([a, far], [a, far]) == 1.0
    assert proximity_class([b, far], [a]) == pytest.approx(1 / 6)
    assert proximity_class([b], [a, far]) == proximity_shape(b, [a, far])
    with pytest.raises(ParameterError):
        proximity_class([], [a])
    with pytest.raises(ParameterError):
        proximity_class([a], [])


def test_proximity_matrix_closest_base():
    a = block(8, (0, 0, 0), (2, 2, 2))
    b = block(8, (1, 0, 0), (2, 2, 2))
    far = block(8, (5, 5, 5), (2, 2, 2))
    matrix = proximity_matrix({"x": [a], "y": [far]}, {"n": [b], "m": [far]})
    assert matrix.values.shape == (2, 2)
    assert matrix.closest_base("n") == "x"
    assert matrix.closest_base("m") == "y"
    assert matrix.best_base_proximity() == {
        "n": pytest.approx(1 / 3),
        "m": 1.0,
    }


def test_proximity_never_drops_as_base_set_grows():
    rng = np.random.default_rng(3)
    for _ in range(50):
        shapes = [random_grid(rng, 6, 0.3) for _ in range(3)]
        pool = [random_grid(rng, 6, rng.uniform(0.1, 0.6)) for _ in range(8)]
        by_shape = [proximity_shape(shapes[0], pool[:n]) for n in range(1, 9)]
        by_class = [proximity_class(shapes, pool[:n]) for n in range(1, 9)]
        assert by_shape == sorted(by_shape)
        assert by_class == sorted(by_class)


def test_intra_class_diversity():
    a = block(8, (0, 0, 0), (2, 2, 2))
    b = block(8, (1, 0, 0), (2, 2, 2))
    far = block(8, (5, 5, 5), (2, 2, 2))
    assert intra_class_diversity([a, a, far, far]) == 0.0
    assert intra_class_diversity([a, b]) == pytest.approx(2 / 3)
    assert intra_class_diversity([a, far]) == 1.0
    # the nearest partner counts, not the mean over the class
    assert intra_class_diversity([a, a, b]) == pytest.approx(2 / 9)
    with pytest.raises(ParameterError):
        intra_class_diversity([a])
