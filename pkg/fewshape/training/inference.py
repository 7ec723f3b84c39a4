from typing import Optional, Sequence, Union

import numpy as np
import torch

from fewshape.core.const import DEFAULT_THRESHOLD
from fewshape.exceptions import ConfigurationError, DimensionError
from fewshape.model import ReconstructionModel
from fewshape.synth.dataset import image_to_tensor
from fewshape.voxels.grid import OccupancyField

__all__ = ["predict", "predict_batch", "batch_iou"]


def batch_iou(
    probabilities: torch.Tensor,
    target: torch.Tensor,
    threshold: float = DEFAULT_THRESHOLD,
) -> torch.Tensor:
    """Per-sample IoU of thresholded predictions; empty ∪ empty is 1."""
    if probabilities.shape != target.shape:
        raise DimensionError(
            "occupancy shape", tuple(target.shape), tuple(probabilities.shape)
        )
    pred = (probabilities >= threshold).flatten(1)
    gt = target.flatten(1) > 0.5
    inter = (pred & gt).sum(1).double()
    union = (pred | gt).sum(1).double()
    return torch.where(union > 0, inter / union.clamp(min=1), 1.0)


def _as_batch(image: Union[np.ndarray, torch.Tensor]) -> torch.Tensor:
    if isinstance(image, np.ndarray):
        image = image_to_tensor(image)
    if image.dim() == 3:
        image = image.unsqueeze(0)
    return image.float()


def predict_batch(
    model: ReconstructionModel,
    images: torch.Tensor,
    class_ids: Optional[Sequence[str]] = None,
) -> torch.Tensor:
    """Eval-mode forward pass of a (B, 3, H, W) batch."""
    model.eval()
    classes = None
    if model.class_conditioned:
        if class_ids is None:
            raise ConfigurationError(
                f"Variant {model.kind.value} needs a class id per image"
            )
        classes = model.registry.indices(list(class_ids))
        model.check_ready(classes)
    with torch.no_grad():
        return model(images, classes)


def predict(
    model: ReconstructionModel,
    image: Union[np.ndarray, torch.Tensor],
    class_id: Optional[str] = None,
) -> OccupancyField:
    """Occupancy field of one image; unconditioned variants ignore
    ``class_id``."""
    batch = _as_batch(image)
    ids = None if class_id is None else [class_id]
    p = predict_batch(model, batch, ids)[0]
    return OccupancyField(p.double().numpy())
