"""Joint training of the backbone and the base-class conditioning."""
import logging
import math
from typing import List, Tuple

import torch
from torch.utils.data import DataLoader
from tqdm import tqdm

from fewshape.core.const import Role, Split
from fewshape.core.helpers import derive_seed, torch_generator
from fewshape.exceptions import (
    ClassLookupError,
    ConfigurationError,
    NumericError,
)
from fewshape.model import ReconstructionModel
from fewshape.nn.loss import voxel_bce
from fewshape.priors.average_shape import AverageShapePrior
from fewshape.priors.variants import PriorKind
from fewshape.synth.dataset import ShapeImageDataset
from fewshape.synth.manifest import DatasetManifest
from fewshape.training.config import Optimizer, TrainConfig
from fewshape.training.episode import load_shapes
from fewshape.training.inference import batch_iou
from fewshape.training.records import LossCurve

__all__ = ["train_base", "training_classes", "make_optimizer"]

logger = logging.getLogger(__name__)


def training_classes(
    model: ReconstructionModel,
    manifest: DatasetManifest,
    config: TrainConfig,
) -> List[str]:
    """Classes of the training entries, checked against the run kind."""
    present = list(
        dict.fromkeys(e.class_id for e in manifest.select(split=Split.TRAIN))
    )
    if not present:
        raise ConfigurationError("Manifest has no training entries")
    novel = [c for c in present if manifest.splits[c] == Role.NOVEL]
    if novel and not config.merge_novel:
        raise ConfigurationError(
            f"Novel classes {novel} are present in a base-only training run"
        )
    if config.merge_novel and model.kind != PriorKind.NONE:
        raise ConfigurationError(
            "Merged training is only defined for the unconditioned variant"
        )
    unknown = [c for c in present if c not in model.registry]
    if unknown:
        raise ClassLookupError(unknown, "Not registered in the model")
    return present


def make_optimizer(
    params: List[torch.nn.Parameter],
    optimizer: Optimizer,
    learning_rate: float,
    momentum: float,
) -> torch.optim.Optimizer:
    if optimizer is Optimizer.ADAM:
        return torch.optim.Adam(params, lr=learning_rate)
    return torch.optim.SGD(params, lr=learning_rate, momentum=momentum)


def _set_average_shapes(
    model: ReconstructionModel,
    manifest: DatasetManifest,
    classes: List[str],
    seed: int,
) -> None:
    prior = model.prior
    if not isinstance(prior, AverageShapePrior):
        return
    for class_id in classes:
        entries = manifest.select([class_id], Split.TRAIN)
        unique = list({e.shape: e for e in entries}.values())
        prior.set_class_shapes(class_id, load_shapes(manifest, unique), seed)


def train_base(
    model: ReconstructionModel,
    manifest: DatasetManifest,
    config: TrainConfig,
    progress: bool = False,
) -> Tuple[ReconstructionModel, LossCurve]:
    """Minimize the voxel BCE over the training entries.

    The backbone and the class conditioning of every trained class are
    optimized jointly; the result is determined by ``config.seed``.
    """
    classes = training_classes(model, manifest, config)
    _set_average_shapes(model, manifest, classes, config.seed)
    dataset = ShapeImageDataset(
        manifest,
        manifest.select(classes, Split.TRAIN),
        {c: model.registry.index(c) for c in classes},
    )
    loader = DataLoader(
        dataset,
        batch_size=config.batch_size,
        shuffle=True,
        generator=torch_generator(config.seed, "shuffle"),
    )
    optimizer = make_optimizer(
        [p for p in model.parameters() if p.requires_grad],
        config.optimizer,
        config.learning_rate,
        config.momentum,
    )
    curve = LossCurve()
    logger.info(
        "Training %s on %d classes, %d samples, %d epochs",
        model.kind.value,
        len(classes),
        len(dataset),
        config.epochs,
    )
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(derive_seed(config.seed, "train"))
        model.train()
        epochs = tqdm(
            range(1, config.epochs + 1),
            desc="train",
            disable=not progress,
        )
        for epoch in epochs:
            total_loss, total_iou, seen = 0.0, 0.0, 0
            for images, occupancy, class_idx in loader:
                optimizer.zero_grad()
                probs = model(images, class_idx)
                loss = voxel_bce(probs, occupancy)
                if not math.isfinite(loss.item()):
                    raise NumericError(
                        "Training loss is not finite", (epoch,)
                    )
                loss.backward()
                optimizer.step()
                n = images.size(0)
                total_loss += loss.item() * n
                total_iou += float(batch_iou(probs.detach(), occupancy).sum())
                seen += n
            record = curve.append(
                epoch, Split.TRAIN, total_loss / seen, total_iou / seen
            )
            logger.info(
                "epoch %d: loss %.5f, mean IoU %.4f",
                epoch,
                record.loss,
                record.mean_iou,
            )
    model.eval()
    model.mark_ready(classes)
    return model, curve
