"""Predicted and ground-truth binvox pairs for external viewers."""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Union

from tqdm import tqdm

from fewshape.core.const import DEFAULT_THRESHOLD, Split
from fewshape.evaluation.evaluate import check_adapted, evaluation_classes
from fewshape.model import ReconstructionModel
from fewshape.synth.manifest import DatasetManifest
from fewshape.synth.render import load_image
from fewshape.training.inference import predict
from fewshape.voxels.binvox import load_binvox, save_binvox
from fewshape.voxels.grid import threshold as binarize
from fewshape.voxels.metrics import iou

__all__ = ["ExportedPair", "export_predictions"]

logger = logging.getLogger(__name__)


@dataclass
class ExportedPair:
    class_id: str
    prediction: Path
    ground_truth: Path
    iou: float


def export_predictions(
    model: ReconstructionModel,
    manifest: DatasetManifest,
    out_dir: Union[str, Path],
    classes: Optional[Iterable[str]] = None,
    threshold: float = DEFAULT_THRESHOLD,
    progress: bool = False,
) -> List[ExportedPair]:
    """Write ``<class>/<image stem>.pred.binvox`` and ``.gt.binvox`` for
    every test-split query."""
    out_dir = Path(out_dir)
    selected = evaluation_classes(manifest, classes)
    check_adapted(model, selected)
    entries = manifest.select(selected, Split.TEST)
    pairs = []
    for entry in tqdm(entries, desc="export", disable=not progress):
        class_id = entry.class_id if model.class_conditioned else None
        image = load_image(manifest.resolve(entry.image))
        pred = binarize(predict(model, image, class_id), threshold)
        gt = load_binvox(manifest.resolve(entry.shape))
        stem = Path(entry.image).stem
        pred_path = out_dir / entry.class_id / f"{stem}.pred.binvox"
        gt_path = out_dir / entry.class_id / f"{stem}.gt.binvox"
        save_binvox(pred, pred_path)
        save_binvox(gt, gt_path)
        pairs.append(
            ExportedPair(entry.class_id, pred_path, gt_path, iou(pred, gt))
        )
    logger.info("Exported %d prediction pairs to %s", len(pairs), out_dir)
    return pairs
