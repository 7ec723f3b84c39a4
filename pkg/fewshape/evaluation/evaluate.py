"""Per-class IoU of a frozen model on the test-split queries."""
import logging
from dataclasses import dataclass, replace
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from fewshape.core.const import DEFAULT_THRESHOLD, Split
from fewshape.evaluation.report import ReportRow
from fewshape.exceptions import (
    ClassLookupError,
    ConfigurationError,
    NumericError,
    ParameterError,
)
from fewshape.model import ReconstructionModel
from fewshape.synth.manifest import DatasetManifest, ManifestEntry
from fewshape.training.episode import load_pairs
from fewshape.training.inference import batch_iou, predict_batch

__all__ = [
    "GainSummary",
    "check_adapted",
    "evaluate",
    "evaluation_classes",
    "query_ious",
    "relative_gain",
]

logger = logging.getLogger(__name__)

EVAL_BATCH_SIZE = 32


def _check_threshold(threshold: float) -> None:
    if not 0.0 < threshold < 1.0:
        raise ParameterError("threshold", threshold, "must be in (0, 1)")


def evaluation_classes(
    manifest: DatasetManifest, classes: Optional[Iterable[str]] = None
) -> List[str]:
    """Requested classes in manifest order."""
    if classes is None:
        return manifest.classes
    wanted = list(dict.fromkeys(classes))
    unknown = [c for c in wanted if c not in manifest.splits]
    if unknown:
        raise ClassLookupError(unknown, "Not in manifest")
    return [c for c in manifest.classes if c in wanted]


def check_adapted(model: ReconstructionModel, classes: Sequence[str]):
    """Every conditioned class must have learned conditioning."""
    unregistered = [c for c in classes if c not in model.registry]
    if unregistered:
        raise ClassLookupError(unregistered, "Not registered in the model")
    if not model.class_conditioned:
        return
    ready = set(model.ready_classes())
    missing = [c for c in classes if c not in ready]
    if missing:
        raise ClassLookupError(
            missing, "Not adapted, run adaptation first for"
        )


def query_ious(
    model: ReconstructionModel,
    manifest: DatasetManifest,
    entries: Sequence[ManifestEntry],
    threshold: float = DEFAULT_THRESHOLD,
    batch_size: int = EVAL_BATCH_SIZE,
    conditioning: Optional[Sequence[str]] = None,
) -> np.ndarray:
    """IoU of every entry; ``conditioning`` overrides the class each
    prediction is conditioned on."""
    _check_threshold(threshold)
    if batch_size < 1:
        raise ParameterError("batch_size", batch_size, "must be >= 1")
    if conditioning is None:
        conditioning = [e.class_id for e in entries]
    elif len(conditioning) != len(entries):
        raise ConfigurationError(
            f"{len(conditioning)} conditioning classes for "
            f"{len(entries)} queries"
        )
    out = np.zeros(len(entries))
    for start in range(0, len(entries), batch_size):
        stop = min(start + batch_size, len(entries))
        images, occupancy = load_pairs(manifest, entries[start:stop])
        probs = predict_batch(model, images, conditioning[start:stop])
        out[start:stop] = batch_iou(probs, occupancy, threshold).numpy()
    return out


def evaluate(
    model: ReconstructionModel,
    manifest: DatasetManifest,
    classes: Optional[Iterable[str]] = None,
    threshold: float = DEFAULT_THRESHOLD,
    batch_size: int = EVAL_BATCH_SIZE,
    method: Optional[str] = None,
    shots: int = 0,
) -> List[ReportRow]:
    """Mean IoU over the test-split queries of each class, one row per
    class in manifest order."""
    _check_threshold(threshold)
    selected = evaluation_classes(manifest, classes)
    check_adapted(model, selected)
    queries: Dict[str, List[ManifestEntry]] = {
        c: manifest.select([c], Split.TEST) for c in selected
    }
    empty = [c for c, q in queries.items() if not q]
    if empty:
        raise ParameterError("classes", empty, "no test-split queries")
    method = model.kind.value if method is None else method
    rows = []
    for class_id, entries in queries.items():
        ious = query_ious(model, manifest, entries, threshold, batch_size)
        rows.append(
            ReportRow(
                class_id=class_id,
                method=method,
                shots=shots,
                mean_iou=float(ious.mean()),
                n_queries=len(entries),
            )
        )
        logger.info(
            "%s %s: mean IoU %.4f over %d queries",
            method,
            class_id,
            rows[-1].mean_iou,
            len(entries),
        )
    return rows


@dataclass
class GainSummary:
    rows: List[ReportRow]
    mean: float


def relative_gain(
    rows: Sequence[ReportRow], zs_rows: Sequence[ReportRow]
) -> GainSummary:
    """Per-class (m - z) / z against the zero-shot rows, and the unweighted
    mean over classes."""
    if not rows:
        raise ParameterError("rows", [], "nothing to compare")
    zs = {r.class_id: r.mean_iou for r in zs_rows}
    ids = [r.class_id for r in rows]
    if len(set(ids)) != len(ids) or set(ids) != set(zs):
        raise ClassLookupError(
            sorted(set(ids) ^ set(zs)) or ids,
            "Class sets of the compared reports differ at",
        )
    zero = [c for c in ids if zs[c] == 0.0]
    if zero:
        raise NumericError("Zero-shot IoU is zero", tuple(zero))
    gains = [(r.mean_iou - zs[r.class_id]) / zs[r.class_id] for r in rows]
    out = [replace(r, relative_gain=g) for r, g in zip(rows, gains)]
    return GainSummary(out, float(np.mean(gains)))
