"""Desk-scale training runs on the synthetic benchmark."""
from typing import Dict, List

import numpy as np
import pytest

from fewshape.core.const import Split
from fewshape.evaluation import (
    AblationKind,
    AblationSpec,
    class_shapes,
    evaluate,
    query_ious,
    relative_gain,
    run_ablation,
)
from fewshape.model import ModelConfig, ReconstructionModel
from fewshape.priors import ClassRegistry, PriorKind
from fewshape.synth import build_dataset, morph_specs, reference_benchmark
from fewshape.synth.manifest import DatasetManifest
from fewshape.training import (
    AdaptConfig,
    TrainConfig,
    adapt_novel,
    make_episode,
    onn_expected_score,
    train_base,
)
from fewshape.voxels import proximity_class, proximity_matrix

from .entities import (
    TINY_IMAGE_SIZE,
    TINY_RESOLUTION,
    tiny_render,
    tiny_specs,
)

pytestmark = pytest.mark.slow

SEEDS = [0, 1, 2]
SHOTS = 25


def registry_of(manifest: DatasetManifest) -> ClassRegistry:
    return ClassRegistry(manifest.base_classes, manifest.novel_classes)


def base_only(manifest: DatasetManifest) -> DatasetManifest:
    return manifest.subset(
        manifest.select(manifest.base_classes, Split.TRAIN)
    )


@pytest.fixture(scope="module")
def reference(tmp_path_factory) -> DatasetManifest:
    return build_dataset(
        reference_benchmark(),
        per_class=40,
        views=1,
        split_ratio=0.75,
        seed=0,
        out_dir=tmp_path_factory.mktemp("reference"),
    )


@pytest.fixture(scope="module")
def close_reference(tmp_path_factory) -> DatasetManifest:
    """The reference classes plus a novel class drawn like ``can``."""
    specs = reference_benchmark()
    can = next(s for s in specs if s.class_id == "can")
    return build_dataset(
        specs + morph_specs(can, {"radius": 1.0}, 1),
        per_class=40,
        views=1,
        split_ratio=0.75,
        seed=0,
        out_dir=tmp_path_factory.mktemp("close"),
    )


def reference_model(
    kind: PriorKind, seed: int, manifest: DatasetManifest
) -> ReconstructionModel:
    model = ReconstructionModel(
        ModelConfig(variant=kind, width_scale=0.25, seed=seed),
        registry_of(manifest),
    )
    train_base(
        model,
        base_only(manifest),
        TrainConfig(epochs=10, batch_size=16, learning_rate=1e-3, seed=seed),
    )
    return model


def test_overfit_twenty_shapes(tmp_path):
    manifest = build_dataset(
        tiny_specs()[:2],
        per_class=11,
        views=1,
        split_ratio=0.95,
        seed=0,
        out_dir=tmp_path,
        render_params=tiny_render(),
        resolution=TINY_RESOLUTION,
    )
    train = manifest.select(manifest.base_classes, Split.TRAIN)
    assert len(train) == 20
    model = ReconstructionModel(
        ModelConfig(
            image_size=TINY_IMAGE_SIZE,
            resolution=TINY_RESOLUTION,
            embedding_dim=64,
            width_scale=0.25,
        ),
        registry_of(manifest),
    )
    train_base(
        model,
        manifest.subset(train),
        TrainConfig(epochs=200, batch_size=4, learning_rate=1e-3),
    )
    assert query_ious(model, manifest, train).mean() >= 0.9


def test_few_shot_ordering(reference):
    novel = reference.novel_classes
    gains: Dict[PriorKind, List[float]] = {
        PriorKind.WALLACE_AVG: [],
        PriorKind.CGCE: [],
        PriorKind.HYBRID: [],
    }
    for seed in SEEDS:
        zs_model = reference_model(PriorKind.NONE, seed, reference)
        zs = evaluate(zs_model, reference, novel)
        episodes = [make_episode(reference, c, SHOTS, seed) for c in novel]
        for kind in gains:
            model = reference_model(kind, seed, reference)
            adapt_novel(model, reference, episodes, AdaptConfig(seed=seed))
            rows = evaluate(model, reference, novel, shots=SHOTS)
            gains[kind].append(relative_gain(rows, zs).mean)
    mean = {kind: float(np.mean(g)) for kind, g in gains.items()}
    assert mean[PriorKind.WALLACE_AVG] >= 0.0
    assert mean[PriorKind.CGCE] >= mean[PriorKind.WALLACE_AVG] + 0.05
    assert mean[PriorKind.HYBRID] >= mean[PriorKind.CGCE]


def test_random_class_embeddings_hurt(reference):
    drops = []
    for seed in SEEDS:
        model = reference_model(PriorKind.GCE, seed, reference)
        spec = AblationSpec(
            AblationKind.GCE_RAND, seed=seed, classes=reference.base_classes
        )
        report = run_ablation(model, spec, reference)
        drops.append(report.details["relative_drop"])
    assert np.mean(drops) >= 0.2


def test_onn_score_grows_with_database(reference):
    for class_id in reference.novel_classes:
        db = class_shapes(reference, [class_id])[class_id]
        queries = class_shapes(reference, [class_id], Split.TEST)[class_id]
        scores = [
            onn_expected_score(queries, db, k, draws=100)
            for k in (1, 2, 5, 10, None)
        ]
        assert scores == sorted(scores)


def test_onn_single_shape_loses_to_zero_shot(close_reference):
    manifest = close_reference
    model = reference_model(PriorKind.NONE, 0, manifest)
    base = class_shapes(manifest, manifest.base_classes)
    novel = class_shapes(manifest, manifest.novel_classes)
    assert proximity_matrix(base, novel).closest_base("can~0") == "can"
    base_shapes = [s for shapes in base.values() for s in shapes]
    checked = 0
    for row in evaluate(model, manifest, manifest.novel_classes):
        db = novel[row.class_id]
        if proximity_class(db, base_shapes) <= 0.5:
            continue
        queries = class_shapes(manifest, [row.class_id], Split.TEST)
        onn = onn_expected_score(queries[row.class_id], db, 1, draws=100)
        assert onn < row.mean_iou
        checked += 1
    assert checked > 0
