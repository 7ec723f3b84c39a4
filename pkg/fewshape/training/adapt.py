"""Few-shot adaptation of novel-class conditioning.

Only the class rows of the adapted classes receive gradient; everything
else (backbone, shared codebooks, batch-norm statistics and the rows of
all other classes) stays bit-identical.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Sequence, Union

import torch
from torch import nn

from fewshape.core.helpers import derive_seed
from fewshape.exceptions import (
    ClassLookupError,
    ConfigurationError,
    NumericError,
)
from fewshape.model import ReconstructionModel
from fewshape.nn.loss import voxel_bce
from fewshape.priors.average_shape import AverageShapePrior
from fewshape.synth.manifest import DatasetManifest
from fewshape.training.config import AdaptConfig
from fewshape.training.episode import FewShotEpisode, load_pairs, load_shapes

__all__ = [
    "AdaptResult",
    "ParameterCensus",
    "adapt_novel",
    "parameter_census",
    "snapshot",
]

logger = logging.getLogger(__name__)

StateDict = Dict[str, torch.Tensor]


@dataclass
class ParameterCensus:
    changed: Dict[str, int] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(self.changed.values())

    @property
    def names(self) -> List[str]:
        return sorted(self.changed)


def snapshot(model: nn.Module) -> StateDict:
    return {k: v.detach().clone() for k, v in model.state_dict().items()}


def parameter_census(
    before: Mapping[str, torch.Tensor], after: Mapping[str, torch.Tensor]
) -> ParameterCensus:
    """Number of scalars that differ per state entry."""
    if set(before) != set(after):
        raise ConfigurationError(
            "State dictionaries have different entries: "
            f"{sorted(set(before) ^ set(after))}"
        )
    changed = {}
    for name, a in before.items():
        n = int(torch.ne(a, after[name]).sum())
        if n:
            changed[name] = n
    return ParameterCensus(changed)


@dataclass
class AdaptResult:
    class_ids: List[str]
    free_parameters: int
    steps: int
    initial_loss: float
    final_loss: float
    losses: List[float] = field(default_factory=list)


def _row_mask(param: torch.Tensor, rows: torch.Tensor) -> torch.Tensor:
    mask = torch.zeros_like(param)
    mask[rows] = 1.0
    return mask


def _episodes(
    episodes: Union[FewShotEpisode, Sequence[FewShotEpisode]]
) -> List[FewShotEpisode]:
    if isinstance(episodes, FewShotEpisode):
        return [episodes]
    return list(episodes)


def adapt_novel(
    model: ReconstructionModel,
    manifest: DatasetManifest,
    episodes: Union[FewShotEpisode, Sequence[FewShotEpisode]],
    config: AdaptConfig,
) -> AdaptResult:
    """Fit the class conditioning of the episode classes on their support
    sets with SGD and momentum, backbone frozen.

    The rows with the lowest support loss seen are kept, so the final
    support loss never exceeds the loss at initialization.
    """
    if not model.class_conditioned:
        raise ConfigurationError(
            f"Variant {model.kind.value} has no class-specific parameters "
            "to adapt"
        )
    episodes = _episodes(episodes)
    class_ids = [ep.class_id for ep in episodes]
    unknown = [c for c in class_ids if c not in model.registry]
    if unknown:
        raise ClassLookupError(unknown, "Not registered in the model")
    model.reinitialize_classes(class_ids, config.seed)

    if isinstance(model.prior, AverageShapePrior):
        for ep in episodes:
            model.prior.set_class_shapes(
                ep.class_id, load_shapes(manifest, ep.support), config.seed
            )
        model.mark_ready(class_ids)
        return AdaptResult(class_ids, 0, 0, math.nan, math.nan)

    entries = [e for ep in episodes for e in ep.support]
    images, occupancy = load_pairs(manifest, entries)
    classes = model.registry.indices([e.class_id for e in entries])
    rows = model.registry.indices(class_ids)

    adaptable = model.adaptable_parameters()
    trainable_before = {
        name: p.requires_grad for name, p in model.named_parameters()
    }
    hooks = []
    for p in model.parameters():
        p.requires_grad_(False)
    free = 0
    for p in adaptable.values():
        p.requires_grad_(True)
        mask = _row_mask(p, rows)
        free += int(mask.sum())
        hooks.append(p.register_hook(lambda g, m=mask: g * m))
    params = list(adaptable.values())
    optimizer = torch.optim.SGD(
        params, lr=config.learning_rate, momentum=config.momentum
    )

    best = [p.detach()[rows].clone() for p in params]
    losses: List[float] = []
    best_loss, stale = math.inf, 0
    model.eval()
    try:
        with torch.random.fork_rng(devices=[]):
            torch.manual_seed(derive_seed(config.seed, "adapt", *class_ids))
            for step in range(config.steps):
                optimizer.zero_grad()
                loss = voxel_bce(model(images, classes), occupancy)
                value = loss.item()
                if not math.isfinite(value):
                    raise NumericError(
                        "Adaptation loss is not finite", (step,)
                    )
                losses.append(value)
                if value < best_loss - config.min_delta:
                    best_loss, stale = value, 0
                    best = [p.detach()[rows].clone() for p in params]
                else:
                    stale += 1
                    if stale >= config.patience:
                        logger.debug("Support loss plateau at step %d", step)
                        break
                logger.debug("adapt step %d: loss %.6f", step, value)
                loss.backward()
                optimizer.step()
    finally:
        for h in hooks:
            h.remove()
        for name, p in model.named_parameters():
            p.requires_grad_(trainable_before[name])

    with torch.no_grad():
        for p, rows_best in zip(params, best):
            p[rows] = rows_best
        final = voxel_bce(model(images, classes), occupancy).item()
    model.mark_ready(class_ids)
    logger.info(
        "Adapted %s (%s): support loss %.5f -> %.5f in %d steps",
        ", ".join(class_ids),
        model.kind.value,
        losses[0],
        final,
        len(losses),
    )
    return AdaptResult(
        class_ids, free, len(losses), losses[0], final, losses
    )
