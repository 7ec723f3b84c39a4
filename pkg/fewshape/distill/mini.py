"""Dataset distillation: per-class medoid shapes with a few views each."""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional

from mashumaro import DataClassDictMixin
from tqdm import tqdm

from fewshape.config import RecordConfig
from fewshape.core.const import Split
from fewshape.core.helpers import derive_seed, numpy_rng
from fewshape.distill.distances import DistanceCache, pairwise_distances
from fewshape.distill.kmedoids import kmedoids
from fewshape.exceptions import (
    ClassLookupError,
    ConfigurationError,
    NumericError,
    ParameterError,
)
from fewshape.synth.manifest import DatasetManifest, ManifestEntry
from fewshape.voxels.binvox import load_binvox

__all__ = [
    "MiniSpec",
    "RatioReport",
    "MiniSize",
    "distill",
    "performance_ratio",
    "shapenet_mini_size",
]

logger = logging.getLogger(__name__)


@dataclass
class MiniSpec(DataClassDictMixin):
    k: int = 1250
    v: int = 4
    seed: int = 0

    class Config(RecordConfig):
        pass

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ParameterError("k", self.k, "must be >= 1")
        if self.v < 1:
            raise ParameterError("v", self.v, "must be >= 1")


def _sample_views(
    views: List[ManifestEntry], spec: MiniSpec, class_id: str
) -> List[ManifestEntry]:
    if len(views) <= spec.v:
        return sorted(views, key=lambda e: e.view)
    # keyed by shape path so the draw does not depend on input order
    rng = numpy_rng(spec.seed, "views", class_id, views[0].shape)
    ordered = sorted(views, key=lambda e: e.view)
    picked = rng.choice(len(ordered), size=spec.v, replace=False)
    return [ordered[i] for i in sorted(picked)]


def distill(
    manifest: DatasetManifest,
    spec: MiniSpec,
    cache: Optional[DistanceCache] = None,
    progress: bool = False,
) -> DatasetManifest:
    """Keep the k medoid training shapes of every class (all of them when
    a class has at most k) with v views per kept shape. Test entries are
    carried over unchanged."""
    kept: Dict[str, int] = {}
    entries: List[ManifestEntry] = []
    classes = tqdm(manifest.classes, desc="distill", disable=not progress)
    for class_id in classes:
        train = manifest.select([class_id], Split.TRAIN)
        by_shape: Dict[str, List[ManifestEntry]] = {}
        for e in train:
            by_shape.setdefault(e.shape, []).append(e)
        if not by_shape:
            raise ConfigurationError(
                f"Class {class_id!r} has no training shapes to distill"
            )
        # sorted so the medoid draw does not depend on manifest order
        paths = sorted(by_shape)
        if spec.k >= len(paths):
            chosen = paths
        else:
            shapes = [load_binvox(manifest.resolve(p)) for p in paths]
            dist = (
                cache.get(shapes)
                if cache is not None
                else pairwise_distances(shapes)
            )
            medoids = kmedoids(dist, spec.k, derive_seed(spec.seed, class_id))
            chosen = [paths[i] for i in medoids.indices]
            logger.debug(
                "%s: %d medoids, objective %.4f after %d iterations",
                class_id,
                len(chosen),
                medoids.objective,
                len(medoids.history),
            )
        kept[class_id] = len(chosen)
        for path in chosen:
            entries.extend(_sample_views(by_shape[path], spec, class_id))
        entries.extend(manifest.select([class_id], Split.TEST))
    provenance = dict(manifest.provenance)
    provenance["distill"] = {
        "k": spec.k,
        "v": spec.v,
        "seed": spec.seed,
        "kept": kept,
        "view_sampling": "per_medoid",
        "source_entries": len(manifest.entries),
    }
    logger.info(
        "Distilled %d entries into %d (k=%d, v=%d)",
        len(manifest.entries),
        len(entries),
        spec.k,
        spec.v,
    )
    return manifest.subset(entries, provenance)


@dataclass
class RatioReport:
    ratios: Dict[str, float]

    @property
    def mean(self) -> float:
        return sum(self.ratios.values()) / len(self.ratios)


def performance_ratio(
    iou_mini: Mapping[str, float], iou_full: Mapping[str, float]
) -> RatioReport:
    """Per-class IoU of the distilled run over the full run, and the mean."""
    if set(iou_mini) != set(iou_full):
        raise ClassLookupError(
            sorted(set(iou_mini) ^ set(iou_full)), "Class sets differ at"
        )
    if not iou_full:
        raise ParameterError("iou_full", {}, "no classes to compare")
    zero = [c for c, v in iou_full.items() if v == 0]
    if zero:
        raise NumericError("Full-data IoU is zero", tuple(zero))
    return RatioReport({c: iou_mini[c] / iou_full[c] for c in iou_full})


@dataclass
class MiniSize:
    kept: Dict[str, int] = field(default_factory=dict)
    views: int = 1

    @property
    def shapes(self) -> int:
        return sum(self.kept.values())

    @property
    def pairs(self) -> int:
        return self.shapes * self.views

    def fraction_of(self, total_pairs: int) -> float:
        if total_pairs <= 0:
            raise NumericError("Total pair count is not positive")
        return self.pairs / total_pairs


def shapenet_mini_size(
    category_sizes: Mapping[str, int], k: int, v: int
) -> MiniSize:
    """Image-shape pair count of a distilled dataset; small categories are
    kept whole."""
    if k < 1 or v < 1:
        raise ParameterError("k, v", (k, v), "must be >= 1")
    return MiniSize({c: min(n, k) for c, n in category_sizes.items()}, v)
