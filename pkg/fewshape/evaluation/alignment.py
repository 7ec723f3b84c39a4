"""Do novel classes attend to the codebooks like their closest base class?"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
from mashumaro import field_options
from mashumaro.mixins.orjson import DataClassORJSONMixin

from fewshape.config import RecordConfig
from fewshape.core.const import Split
from fewshape.evaluation.evaluate import check_adapted
from fewshape.exceptions import ConfigurationError
from fewshape.model import ReconstructionModel
from fewshape.priors.cgce import CompositionalEmbedding, attention_alignment
from fewshape.synth.manifest import DatasetManifest
from fewshape.training.episode import load_shapes
from fewshape.voxels.grid import VoxelGrid
from fewshape.voxels.metrics import (
    ProximityMatrix,
    intra_class_diversity,
    proximity_matrix,
)

__all__ = ["AlignmentRow", "attention_alignment_report", "class_shapes"]

logger = logging.getLogger(__name__)


@dataclass
class AlignmentRow(DataClassORJSONMixin):
    class_id: str = field(metadata=field_options(alias="class"))
    closest_base: str
    proximity: float
    alignment: float
    # over every base class
    mean_alignment: float
    # none for classes with a single training shape
    diversity: Optional[float] = None

    class Config(RecordConfig):
        pass


def class_shapes(
    manifest: DatasetManifest,
    classes: Sequence[str],
    split: Optional[Split] = Split.TRAIN,
) -> Dict[str, List[VoxelGrid]]:
    """Distinct shapes of each class, one entry per shape."""
    out = {}
    for c in classes:
        entries = {e.shape: e for e in manifest.select([c], split)}
        out[c] = load_shapes(manifest, list(entries.values()))
    return out


def attention_alignment_report(
    model: ReconstructionModel,
    manifest: DatasetManifest,
    proximity: Optional[ProximityMatrix] = None,
) -> List[AlignmentRow]:
    """One row per novel class: its closest base class by shape proximity
    and the cosine between their codebook attention, next to the intra-class
    diversity of the novel class."""
    prior = model.prior
    if not isinstance(prior, CompositionalEmbedding):
        raise ConfigurationError(
            f"Variant {model.kind.value} has no codebook attention"
        )
    base, novel = manifest.base_classes, manifest.novel_classes
    if not base or not novel:
        raise ConfigurationError("Manifest needs base and novel classes")
    check_adapted(model, base + novel)
    novel_shapes = class_shapes(manifest, novel)
    if proximity is None:
        proximity = proximity_matrix(
            class_shapes(manifest, base), novel_shapes
        )
    rows = []
    for j, c in enumerate(proximity.novel_classes):
        closest = proximity.closest_base(c)
        shapes = novel_shapes.get(c, [])
        scores = [attention_alignment(prior.attention, c, b) for b in base]
        rows.append(
            AlignmentRow(
                class_id=c,
                closest_base=closest,
                proximity=float(proximity.values[:, j].max()),
                alignment=attention_alignment(prior.attention, c, closest),
                mean_alignment=float(np.mean(scores)),
                diversity=(
                    intra_class_diversity(shapes)
                    if len(shapes) > 1
                    else None
                ),
            )
        )
        logger.info(
            "%s: closest base %s (proximity %.3f), alignment %.3f",
            c,
            closest,
            rows[-1].proximity,
            rows[-1].alignment,
        )
    return rows
