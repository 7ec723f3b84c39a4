"""Ablations: random class embeddings, codebook knockout, the conditioning
placement sweep and the shot-count sweep."""
import copy
import enum
import logging
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import torch
from mashumaro import DataClassDictMixin

from fewshape.config import RecordConfig
from fewshape.core.const import DEFAULT_THRESHOLD, Role, Split
from fewshape.core.helpers import numpy_rng
from fewshape.evaluation.alignment import class_shapes
from fewshape.evaluation.evaluate import (
    EVAL_BATCH_SIZE,
    check_adapted,
    evaluate,
    evaluation_classes,
    query_ious,
    relative_gain,
)
from fewshape.evaluation.report import ReportRow
from fewshape.exceptions import ConfigurationError, ParameterError
from fewshape.model import ModelConfig, ReconstructionModel
from fewshape.priors.cgce import CompositionalEmbedding, knockout_codebook
from fewshape.priors.registry import ClassRegistry
from fewshape.priors.variants import (
    PLACEMENT_SWEEP,
    SHOT_SWEEP,
    Embedding,
    PriorKind,
    PriorVariant,
)
from fewshape.synth.manifest import DatasetManifest
from fewshape.training.adapt import adapt_novel
from fewshape.training.base import train_base
from fewshape.training.config import AdaptConfig, TrainConfig
from fewshape.training.episode import load_pairs, make_episode
from fewshape.training.inference import batch_iou
from fewshape.training.onn import onn_expected_score

__all__ = [
    "AblationKind",
    "AblationSpec",
    "AblationReport",
    "run_ablation",
    "gce_rand",
    "codebook_knockout",
    "placement_sweep",
    "shot_sweep",
    "SHOT_COUNTS",
]

logger = logging.getLogger(__name__)

NOVEL_MEAN = "novel-mean"
SHOT_COUNTS = (1, 5, 10, 25)


class AblationKind(str, enum.Enum):
    GCE_RAND = "gce_rand"
    CODEBOOK_KNOCKOUT = "codebook_knockout"
    PLACEMENT_SWEEP = "placement_sweep"
    SHOT_SWEEP = "shot_sweep"


@dataclass
class AblationSpec(DataClassDictMixin):
    kind: AblationKind
    seed: int = 0
    threshold: float = DEFAULT_THRESHOLD
    classes: Optional[List[str]] = None
    # sweeps only
    shots: int = 25
    shot_counts: List[int] = field(default_factory=lambda: list(SHOT_COUNTS))
    variants: List[PriorKind] = field(default_factory=lambda: list(SHOT_SWEEP))
    draws: int = 100
    train: TrainConfig = field(default_factory=TrainConfig)
    adapt: AdaptConfig = field(default_factory=AdaptConfig)
    model: Optional[ModelConfig] = None

    class Config(RecordConfig):
        pass

    def __post_init__(self) -> None:
        if not 0.0 < self.threshold < 1.0:
            raise ParameterError(
                "threshold", self.threshold, "must be in (0, 1)"
            )
        if self.shots < 1:
            raise ParameterError("shots", self.shots, "must be >= 1")
        if not self.shot_counts or min(self.shot_counts) < 1:
            raise ParameterError(
                "shot_counts", self.shot_counts, "must be nonempty and >= 1"
            )
        if self.draws < 1:
            raise ParameterError("draws", self.draws, "must be >= 1")
        unconditioned = [
            k.value
            for k in self.variants
            if not PriorVariant(k).class_conditioned
        ]
        if not self.variants or unconditioned:
            raise ParameterError(
                "variants",
                unconditioned or self.variants,
                "must be nonempty and class-conditioned",
            )


@dataclass
class AblationReport:
    kind: AblationKind
    rows: List[ReportRow]
    details: Dict[str, Any] = field(default_factory=dict)


def _require_embedding(
    model: ReconstructionModel, embedding: Embedding, kind: AblationKind
) -> None:
    if model.variant.placement.embedding is not embedding:
        raise ConfigurationError(
            f"Ablation {kind.value} does not apply to the "
            f"{model.kind.value} variant"
        )


def _ready_classes(
    model: ReconstructionModel,
    manifest: DatasetManifest,
    classes: Optional[List[str]],
) -> List[str]:
    selected = evaluation_classes(manifest, classes)
    check_adapted(model, selected)
    return selected


def gce_rand(
    model: ReconstructionModel,
    manifest: DatasetManifest,
    spec: AblationSpec,
) -> AblationReport:
    """Evaluate with each query conditioned on a seeded random other class
    instead of its own."""
    _require_embedding(model, Embedding.GCE, spec.kind)
    classes = _ready_classes(model, manifest, spec.classes)
    pool = model.ready_classes()
    if len(pool) < 2:
        raise ConfigurationError(
            "Random class conditioning needs at least two adapted classes"
        )
    own = evaluate(
        model, manifest, classes, spec.threshold, method=model.kind.value
    )
    rows = []
    for row in own:
        entries = manifest.select([row.class_id], Split.TEST)
        others = [c for c in pool if c != row.class_id]
        rng = numpy_rng(spec.seed, "gce-rand", row.class_id)
        picks = rng.integers(len(others), size=len(entries))
        swapped = [others[int(i)] for i in picks]
        ious = query_ious(
            model, manifest, entries, spec.threshold, conditioning=swapped
        )
        rows.append(
            ReportRow(
                class_id=row.class_id,
                method=f"{model.kind.value}-rand",
                shots=row.shots,
                mean_iou=float(ious.mean()),
                n_queries=len(entries),
            )
        )
    mean_own = float(np.mean([r.mean_iou for r in own]))
    mean_rand = float(np.mean([r.mean_iou for r in rows]))
    drop = (mean_own - mean_rand) / mean_own if mean_own > 0 else 0.0
    logger.info(
        "Random class embeddings: mean IoU %.4f -> %.4f", mean_own, mean_rand
    )
    return AblationReport(
        spec.kind,
        own + rows,
        {
            "mean_iou": mean_own,
            "mean_iou_rand": mean_rand,
            "relative_drop": drop,
        },
    )


def _reconstruct(
    model: ReconstructionModel,
    images: torch.Tensor,
    classes: torch.Tensor,
    embedding: torch.Tensor,
) -> torch.Tensor:
    z = model.encoder(images, classes)
    z = torch.cat([z, embedding.expand(z.size(0), -1)], dim=1)
    return model.decoder(z, classes)


def codebook_knockout(
    model: ReconstructionModel,
    manifest: DatasetManifest,
    spec: AblationSpec,
) -> AblationReport:
    """Reconstruct every query with one codebook removed from the class
    embedding at a time.

    ``details["voxel_diff"][class][j]`` is the mean number of voxels whose
    thresholded occupancy flips when codebook ``j`` is left out, and
    ``details["field_change"][class][j]`` the mean absolute change of the
    decoded occupancy probabilities.
    """
    _require_embedding(model, Embedding.CGCE, spec.kind)
    prior = model.prior
    if not isinstance(prior, CompositionalEmbedding):
        raise ConfigurationError("Model has no compositional embedding")
    classes = _ready_classes(model, manifest, spec.classes)
    base_rows = evaluate(model, manifest, classes, spec.threshold)
    num_codebooks = prior.codes.num_codebooks
    rows: List[ReportRow] = []
    voxel_diff: Dict[str, List[float]] = {}
    field_change: Dict[str, List[float]] = {}
    model.eval()
    for class_id in classes:
        entries = manifest.select([class_id], Split.TEST)
        diffs = np.zeros(num_codebooks)
        changes = np.zeros(num_codebooks)
        ious = np.zeros(num_codebooks)
        idx = model.registry.indices(class_id)
        for start in range(0, len(entries), EVAL_BATCH_SIZE):
            batch = entries[start : start + EVAL_BATCH_SIZE]
            images, occupancy = load_pairs(manifest, batch)
            classes_t = idx.expand(len(batch))
            with torch.no_grad():
                full_probs = model(images, classes_t)
                full = full_probs >= spec.threshold
                for j in range(num_codebooks):
                    e = knockout_codebook(
                        prior.codes, prior.attention, class_id, j
                    )
                    probs = _reconstruct(model, images, classes_t, e)
                    flipped = (probs >= spec.threshold) != full
                    diffs[j] += float(flipped.sum())
                    changes[j] += float(
                        (probs - full_probs).abs().flatten(1).mean(1).sum()
                    )
                    ious[j] += float(
                        batch_iou(probs, occupancy, spec.threshold).sum()
                    )
        diffs /= len(entries)
        changes /= len(entries)
        ious /= len(entries)
        voxel_diff[class_id] = diffs.tolist()
        field_change[class_id] = changes.tolist()
        for j in range(num_codebooks):
            rows.append(
                ReportRow(
                    class_id=class_id,
                    method=f"{model.kind.value}-knockout-{j}",
                    shots=0,
                    mean_iou=float(ious[j]),
                    n_queries=len(entries),
                )
            )
        logger.debug("%s knockout voxel diff: %s", class_id, diffs)
    return AblationReport(
        spec.kind,
        base_rows + rows,
        {"voxel_diff": voxel_diff, "field_change": field_change},
    )


def _sweep_setup(
    model: ReconstructionModel,
    manifest: DatasetManifest,
    spec: AblationSpec,
) -> Tuple[ModelConfig, ClassRegistry, DatasetManifest, List[str]]:
    base = manifest.base_classes
    novel = evaluation_classes(
        manifest, spec.classes if spec.classes else manifest.novel_classes
    )
    if not base or not novel:
        raise ConfigurationError(
            f"The {spec.kind.value} ablation needs base and novel classes"
        )
    not_novel = [c for c in novel if manifest.splits[c] != Role.NOVEL]
    if not_novel:
        raise ConfigurationError(f"{not_novel} are not novel classes")
    template = spec.model if spec.model is not None else model.config
    registry = ClassRegistry(base, manifest.novel_classes)
    base_manifest = manifest.subset(manifest.select(base, Split.TRAIN))
    return template, registry, base_manifest, novel


def _train_variant(
    template: ModelConfig,
    kind: PriorKind,
    registry: ClassRegistry,
    base_manifest: DatasetManifest,
    spec: AblationSpec,
) -> ReconstructionModel:
    config = replace(
        template, variant=kind, single_shape_prior=False, seed=spec.seed
    )
    candidate = ReconstructionModel(config, registry)
    train_base(candidate, base_manifest, spec.train)
    return candidate


def placement_sweep(
    model: ReconstructionModel,
    manifest: DatasetManifest,
    spec: AblationSpec,
) -> AblationReport:
    """Train and adapt every conditioning placement on ``manifest`` and
    tabulate the mean novel-class IoU, one row per placement.

    The architecture comes from ``spec.model``, falling back to the given
    model's configuration.
    """
    template, registry, base_manifest, novel = _sweep_setup(
        model, manifest, spec
    )
    episodes = [
        make_episode(manifest, c, spec.shots, spec.seed) for c in novel
    ]
    rows = []
    per_class: Dict[str, Dict[str, float]] = {}
    for kind in PLACEMENT_SWEEP:
        candidate = _train_variant(
            template, kind, registry, base_manifest, spec
        )
        adapt_novel(candidate, manifest, episodes, spec.adapt)
        class_rows = evaluate(
            candidate, manifest, novel, spec.threshold, shots=spec.shots
        )
        per_class[kind.value] = {r.class_id: r.mean_iou for r in class_rows}
        rows.append(
            ReportRow(
                class_id=NOVEL_MEAN,
                method=kind.value,
                shots=spec.shots,
                mean_iou=float(np.mean([r.mean_iou for r in class_rows])),
                n_queries=sum(r.n_queries for r in class_rows),
            )
        )
        logger.info("%s: mean novel IoU %.4f", kind.value, rows[-1].mean_iou)
    return AblationReport(spec.kind, rows, {"per_class": per_class})


def _gain_row(
    class_rows: List[ReportRow],
    zs_rows: List[ReportRow],
    method: str,
    shots: int,
) -> ReportRow:
    summary = relative_gain(class_rows, zs_rows)
    return ReportRow(
        class_id=NOVEL_MEAN,
        method=method,
        shots=shots,
        mean_iou=float(np.mean([r.mean_iou for r in class_rows])),
        relative_gain=summary.mean,
        n_queries=sum(r.n_queries for r in class_rows),
    )


def shot_sweep(
    model: ReconstructionModel,
    manifest: DatasetManifest,
    spec: AblationSpec,
) -> AblationReport:
    """Mean novel-class IoU and relative gain over the zero-shot model for
    every variant of ``spec.variants`` and the ONN-K baseline at each shot
    count of ``spec.shot_counts``.

    Every variant is trained once on the base classes; each shot count
    adapts a fresh copy of it. ONN-K retrieves from K training shapes of
    the class and is scored on the distinct test shapes.
    ``details["per_class"][method][shots][class]`` holds the class IoUs.
    """
    template, registry, base_manifest, novel = _sweep_setup(
        model, manifest, spec
    )
    zs_model = _train_variant(
        template, PriorKind.NONE, registry, base_manifest, spec
    )
    zs_rows = evaluate(zs_model, manifest, novel, spec.threshold)
    rows = [
        ReportRow(
            class_id=NOVEL_MEAN,
            method=PriorKind.NONE.value,
            shots=0,
            mean_iou=float(np.mean([r.mean_iou for r in zs_rows])),
            relative_gain=0.0,
            n_queries=sum(r.n_queries for r in zs_rows),
        )
    ]
    trained = {
        kind: _train_variant(template, kind, registry, base_manifest, spec)
        for kind in spec.variants
    }
    db = class_shapes(manifest, novel)
    queries = class_shapes(manifest, novel, Split.TEST)
    per_class: Dict[str, Dict[str, Dict[str, float]]] = {}
    for shots in spec.shot_counts:
        episodes = [make_episode(manifest, c, shots, spec.seed) for c in novel]
        for kind, source in trained.items():
            candidate = copy.deepcopy(source)
            adapt_novel(candidate, manifest, episodes, spec.adapt)
            class_rows = evaluate(
                candidate,
                manifest,
                novel,
                spec.threshold,
                method=kind.value,
                shots=shots,
            )
            per_class.setdefault(kind.value, {})[str(shots)] = {
                r.class_id: r.mean_iou for r in class_rows
            }
            rows.append(_gain_row(class_rows, zs_rows, kind.value, shots))
        onn_rows = [
            ReportRow(
                class_id=c,
                method="ONN",
                shots=shots,
                mean_iou=onn_expected_score(
                    queries[c], db[c], shots, spec.draws, spec.seed
                ),
                n_queries=len(queries[c]),
            )
            for c in novel
        ]
        per_class.setdefault("ONN", {})[str(shots)] = {
            r.class_id: r.mean_iou for r in onn_rows
        }
        rows.append(_gain_row(onn_rows, zs_rows, "ONN", shots))
        logger.info(
            "%d shots: %s",
            shots,
            ", ".join(
                f"{r.method} {r.mean_iou:.4f}"
                for r in rows
                if r.shots == shots
            ),
        )
    return AblationReport(
        spec.kind,
        rows,
        {
            "per_class": per_class,
            "zero_shot": {r.class_id: r.mean_iou for r in zs_rows},
        },
    )


_RUNNERS = {
    AblationKind.GCE_RAND: gce_rand,
    AblationKind.CODEBOOK_KNOCKOUT: codebook_knockout,
    AblationKind.PLACEMENT_SWEEP: placement_sweep,
    AblationKind.SHOT_SWEEP: shot_sweep,
}


def run_ablation(
    model: ReconstructionModel,
    spec: AblationSpec,
    manifest: DatasetManifest,
) -> AblationReport:
    return _RUNNERS[spec.kind](model, manifest, spec)
