import copy
from typing import Callable, Dict

import pytest

from fewshape.core.const import Split
from fewshape.model import ReconstructionModel
from fewshape.priors.variants import PriorKind
from fewshape.synth.build import build_dataset
from fewshape.synth.manifest import DatasetManifest
from fewshape.training.base import train_base
from fewshape.training.config import TrainConfig

from .entities import (
    TINY_RESOLUTION,
    tiny_config,
    tiny_registry,
    tiny_render,
    tiny_specs,
)


@pytest.fixture(scope="session")
def tiny_manifest(tmp_path_factory) -> DatasetManifest:
    """6 shapes × 2 views per class, half of the shapes held out."""
    return build_dataset(
        tiny_specs(),
        per_class=6,
        views=2,
        split_ratio=0.5,
        seed=0,
        out_dir=tmp_path_factory.mktemp("tiny"),
        render_params=tiny_render(),
        resolution=TINY_RESOLUTION,
    )


@pytest.fixture(scope="session")
def base_manifest(tiny_manifest) -> DatasetManifest:
    return tiny_manifest.subset(
        tiny_manifest.select(tiny_manifest.base_classes, Split.TRAIN)
    )


@pytest.fixture(scope="session")
def _trained_models() -> Dict[PriorKind, ReconstructionModel]:
    return {}


@pytest.fixture
def trained_model(
    _trained_models, base_manifest
) -> Callable[[PriorKind], ReconstructionModel]:
    """Factory of briefly base-trained tiny models; every call returns a
    private copy."""

    def make(kind: PriorKind) -> ReconstructionModel:
        if kind not in _trained_models:
            model = ReconstructionModel(tiny_config(kind), tiny_registry())
            train_base(
                model, base_manifest, TrainConfig(epochs=1, batch_size=4)
            )
            _trained_models[kind] = model
        return copy.deepcopy(_trained_models[kind])

    return make
