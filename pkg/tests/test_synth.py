import numpy as np
import pytest
import torch

from fewshape.core.const import Role, Split
from fewshape.core.helpers import numpy_rng
from fewshape.exceptions import (
    ClassLookupError,
    ConfigurationError,
    GenerationError,
    ParameterError,
)
from fewshape.synth import (
    DatasetManifest,
    Family,
    RenderParams,
    ShapeImageDataset,
    SynthClassSpec,
    build_dataset,
    generate_class,
    morph_specs,
    reference_benchmark,
    render_views,
)
from fewshape.synth.build import MANIFEST_NAME, split_indices
from fewshape.synth.families import FAMILY_PARAMETERS, generate_shape
from fewshape.synth.render import Camera, load_image, render, sample_cameras
from fewshape.types import Interval
from fewshape.voxels import VoxelGrid, proximity_class

from .entities import spec, tiny_render, tiny_specs


def test_interval_serialization():
    s = SynthClassSpec.from_dict(
        {
            "class_id": "can",
            "family": "cylinder",
            "param_ranges": {"radius": [2, 4], "height": [5, 5]},
        }
    )
    assert s.param_ranges["radius"] == Interval(2.0, 4.0)
    assert s.role is Role.BASE
    assert s.to_dict()["param_ranges"]["height"] == [5.0, 5.0]
    with pytest.raises(ParameterError):
        Interval(3, 2)


def test_spec_parameter_names():
    with pytest.raises(GenerationError) as exc_info:
        spec("can", Family.CYLINDER, radius=(2, 4))
    assert exc_info.value.parameter == "height"
    with pytest.raises(GenerationError) as exc_info:
        spec("can", Family.CYLINDER, radius=(2, 4), height=(3, 4), x=(1, 2))
    assert exc_info.value.parameter == "x"
    with pytest.raises(ConfigurationError):
        SynthClassSpec("can", Family.CYLINDER, {})


def test_zero_width_ranges_give_identical_shapes():
    s = spec("can", Family.CYLINDER, radius=(3, 3), height=(6, 6))
    shapes = generate_class(s, 3, seed=0, resolution=16)
    assert shapes[0] == shapes[1] == shapes[2]
    assert not shapes[0].is_empty


def test_generation_is_deterministic():
    for s in tiny_specs():
        first = generate_class(s, 4, seed=7, resolution=16)
        second = generate_class(s, 4, seed=7, resolution=16)
        assert first == second
        assert all(not g.is_empty for g in first)


def test_every_family_of_reference_benchmark_generates():
    specs = reference_benchmark()
    assert {s.family for s in specs} == set(Family)
    assert [s.role for s in specs].count(Role.NOVEL) == 4
    for s in specs:
        grid = generate_shape(s, numpy_rng(0, s.class_id), 32)
        assert grid.resolution == 32
        assert not grid.is_empty
        assert set(s.param_ranges) == set(FAMILY_PARAMETERS[s.family])


def test_out_of_lattice_parameter_is_named():
    s = spec("can", Family.CYLINDER, radius=(12, 12), height=(6, 6))
    with pytest.raises(GenerationError) as exc_info:
        generate_class(s, 1, seed=0, resolution=16)
    assert exc_info.value.parameter == "radius"
    assert exc_info.value.class_id == "can"


def test_generate_class_needs_shapes():
    with pytest.raises(ParameterError):
        generate_class(tiny_specs()[0], 0, seed=0, resolution=16)


def test_wider_ranges_spread_shapes_more():
    narrow = spec("can", Family.CYLINDER, radius=(4, 4.2), height=(8, 8.2))
    wide = spec("can", Family.CYLINDER, radius=(2, 7), height=(3, 14))

    def spread(s):
        shapes = generate_class(s, 8, seed=0, resolution=16)
        return 1.0 - np.mean(
            [proximity_class([a], [b]) for a in shapes for b in shapes]
        )

    assert spread(wide) > spread(narrow)


def test_fixed_elevation_shared_by_all_views():
    params = RenderParams(elevation_range=Interval(25, 25), image_size=32)
    cameras = sample_cameras(params, 24, seed=0)
    assert len(cameras) == 24
    assert {c.elevation for c in cameras} == {25.0}
    assert all(0.0 <= c.azimuth < 360.0 for c in cameras)


def test_render_views_count_and_range():
    grid = generate_class(tiny_specs()[0], 1, seed=0, resolution=16)[0]
    images = render_views(grid, RenderParams(image_size=32), 24, seed=1)
    assert len(images) == 24
    for image in images:
        assert image.shape == (32, 32, 3)
        assert image.min() >= 0.0 and image.max() <= 1.0
        assert image.max() > 0.0


def test_full_grid_covers_projected_square():
    camera = Camera(azimuth=0.0, elevation=0.0, depth_ratio=1.0)
    image = render(VoxelGrid.full(8), camera, 64)
    mask = image[:, :, 0] > 0
    rows = np.flatnonzero(mask.any(axis=1))
    cols = np.flatnonzero(mask.any(axis=0))
    # the lattice diagonal spans the frame, so a side spans 1/sqrt(3) of it
    side = 64 / np.sqrt(3)
    assert rows[-1] - rows[0] + 1 == pytest.approx(side, abs=2)
    assert cols[-1] - cols[0] + 1 == pytest.approx(side, abs=2)
    assert mask[rows[0] : rows[-1] + 1, cols[0] : cols[-1] + 1].all()


def test_empty_grid_renders_background():
    camera = Camera(azimuth=10.0, elevation=20.0, depth_ratio=0.8)
    assert not render(VoxelGrid.empty(8), camera, 16).any()


def test_split_indices():
    splits = split_indices(10, 0.8, seed=0, class_id="can")
    assert splits.count(Split.TRAIN) == 8
    assert split_indices(10, 0.8, 0, "can") == splits
    assert split_indices(2, 0.99, 0, "can").count(Split.TEST) == 1


def test_build_dataset_counts(tmp_path):
    specs = tiny_specs()[:2]
    manifest = build_dataset(
        specs, 10, 5, 0.8, 0, tmp_path, tiny_render(), resolution=16
    )
    assert len(manifest.select(split=Split.TRAIN)) == 80
    assert len(manifest.select(split=Split.TEST)) == 20
    assert manifest.classes == ["can", "stack"]
    assert len(manifest.shapes("can")) == 10
    loaded = DatasetManifest.load(tmp_path / MANIFEST_NAME)
    assert loaded.to_bytes() == manifest.to_bytes()
    assert loaded.provenance["generator"]["per_class"] == 10


def test_build_dataset_is_byte_identical(tmp_path):
    specs = tiny_specs()[:1]
    for out in ("a", "b"):
        build_dataset(
            specs, 3, 2, 0.5, 5, tmp_path / out, tiny_render(), resolution=16
        )
    a = (tmp_path / "a" / MANIFEST_NAME).read_bytes()
    b = (tmp_path / "b" / MANIFEST_NAME).read_bytes()
    assert a == b
    image = "images/can/0000_01.png"
    assert (tmp_path / "a" / image).read_bytes() == (
        tmp_path / "b" / image
    ).read_bytes()


def test_split_map_lists_every_class(tmp_path):
    base = spec("can", Family.CYLINDER, radius=(3, 4), height=(6, 8))
    specs = [base] + morph_specs(base, {"height": 1.0}, 2)
    manifest = build_dataset(
        specs, 2, 1, 0.5, 0, tmp_path, tiny_render(), resolution=16
    )
    assert manifest.splits == {
        "can": Role.BASE,
        "can~0": Role.NOVEL,
        "can~1": Role.NOVEL,
    }


def test_build_dataset_errors(tmp_path):
    specs = tiny_specs()[:1]
    with pytest.raises(ConfigurationError):
        build_dataset(specs * 2, 2, 1, 0.5, 0, tmp_path)
    with pytest.raises(ParameterError):
        build_dataset(specs, 2, 1, 1.0, 0, tmp_path)
    with pytest.raises(ParameterError):
        build_dataset(specs, 2, 0, 0.5, 0, tmp_path)


def test_manifest_select_and_subset(tiny_manifest):
    assert tiny_manifest.base_classes == ["can", "stack"]
    assert tiny_manifest.novel_classes == ["ring", "bracket"]
    train = tiny_manifest.select(["ring"], Split.TRAIN)
    assert len(train) == 6
    assert {e.split for e in train} == {Split.TRAIN}
    with pytest.raises(ClassLookupError):
        tiny_manifest.select(["chair"])
    sub = tiny_manifest.subset(train)
    assert sub.classes == ["ring"]
    assert sub.root == tiny_manifest.root


def test_manifest_episode(tiny_manifest):
    episode = tiny_manifest.episode("bracket", 2, seed=3)
    assert episode.class_id == "bracket"
    assert len({e.shape for e in episode.support}) == 2
    assert episode.query == tiny_manifest.select(["bracket"], Split.TEST)


def test_manifest_rejects_unknown_entry_class(tiny_manifest):
    lines = tiny_manifest.to_bytes().splitlines()
    header = DatasetManifest.from_bytes(lines[0]).header
    entry = lines[1].replace(b'"class":"can"', b'"class":"chair"')
    with pytest.raises(ClassLookupError):
        DatasetManifest.from_bytes(header.to_jsonb() + b"\n" + entry)
    with pytest.raises(ConfigurationError):
        DatasetManifest.from_bytes(b"")
    with pytest.raises(ConfigurationError):
        DatasetManifest.from_bytes(b"{not json")


def test_manifest_missing_paths(tiny_manifest, tmp_path):
    path = tmp_path / MANIFEST_NAME
    path.write_bytes(tiny_manifest.to_bytes())
    with pytest.raises(ConfigurationError):
        DatasetManifest.load(path)
    assert len(DatasetManifest.load(path, check_paths=False).entries) == 48


def test_dataset_items(tiny_manifest):
    entries = tiny_manifest.select(["can"], Split.TEST)
    dataset = ShapeImageDataset(tiny_manifest, entries, {"can": 3})
    image, occupancy, index = dataset[0]
    assert image.shape == (3, 64, 64)
    assert image.dtype == torch.float32
    assert occupancy.shape == (16, 16, 16)
    assert index == 3
    assert np.allclose(
        image.permute(1, 2, 0).numpy(),
        load_image(tiny_manifest.resolve(entries[0].image)),
    )
    with pytest.raises(ClassLookupError):
        ShapeImageDataset(tiny_manifest, entries, {"stack": 0})


def test_proximity_decreases_as_classes_morph_away():
    base = spec("can", Family.CYLINDER, radius=(3, 3.5), height=(8, 8))
    base_shapes = generate_class(base, 6, seed=0, resolution=16)
    assert proximity_class(list(base_shapes), base_shapes) == 1.0
    proximities = [
        proximity_class(generate_class(s, 6, 0, 16), base_shapes)
        for s in morph_specs(base, {"radius": 1.5}, 3)
    ]
    assert proximities[0] > proximities[1] > proximities[2]
