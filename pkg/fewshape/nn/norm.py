import enum
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import torch
import torch.nn.functional as F
from mashumaro import DataClassDictMixin
from torch import nn

from fewshape.core.const import BN_EPS, BN_MOMENTUM
from fewshape.exceptions import (
    ClassLookupError,
    ConfigurationError,
    DimensionError,
    ParameterError,
)

__all__ = [
    "Conditioning",
    "BNLayerSpec",
    "AffineSource",
    "PlainAffine",
    "ConditionalNorm",
    "NormFactory",
    "plain_norm_factory",
    "cond_batchnorm",
    "check_class_indices",
]


class Conditioning(str, enum.Enum):
    NONE = "none"
    CBN = "CBN"
    CAB = "CAB"


@dataclass
class BNLayerSpec(DataClassDictMixin):
    channels: int
    epsilon: float = BN_EPS
    momentum: float = BN_MOMENTUM

    def __post_init__(self) -> None:
        if self.channels < 1:
            raise ParameterError("channels", self.channels, "must be >= 1")
        if not self.epsilon > 0:
            raise ParameterError("epsilon", self.epsilon, "must be > 0")
        if not 0.0 <= self.momentum <= 1.0:
            raise ParameterError("momentum", self.momentum, "not in [0, 1]")


def check_class_indices(classes: torch.Tensor, num_classes: int) -> None:
    bad = classes[(classes < 0) | (classes >= num_classes)]
    if bad.numel():
        raise ClassLookupError(
            sorted(set(bad.tolist())), "Class index has no stored row"
        )


def cond_batchnorm(
    x: torch.Tensor,
    running_mean: Optional[torch.Tensor],
    running_var: Optional[torch.Tensor],
    gamma: torch.Tensor,
    beta: torch.Tensor,
    training: bool,
    momentum: float = BN_MOMENTUM,
    eps: float = BN_EPS,
) -> torch.Tensor:
    """Batch norm whose affine parameters are given per sample.

    ``gamma`` and ``beta`` are either (C,) or (B, C). In training mode the
    batch statistics normalize ``x`` and update the running buffers in
    place; in eval mode the running statistics are used.
    """
    channels = x.size(1)
    if gamma.shape[-1] != channels or beta.shape[-1] != channels:
        raise DimensionError(
            "affine length", channels, (gamma.shape[-1], beta.shape[-1])
        )
    x_hat = F.batch_norm(
        x,
        running_mean,
        running_var,
        None,
        None,
        training,
        momentum,
        eps,
    )
    view = (-1, channels) + (1,) * (x.dim() - 2)
    if gamma.dim() == 1:
        gamma, beta = gamma.unsqueeze(0), beta.unsqueeze(0)
    return x_hat * gamma.reshape(view) + beta.reshape(view)


class AffineSource(nn.Module):
    """Produces per-sample (gamma, beta) for a normalization layer."""

    channels: int
    conditioned: bool = True

    def forward(  # type: ignore[override]
        self, classes: Optional[torch.Tensor], batch: int
    ) -> Tuple[torch.Tensor, torch.Tensor]:
        raise NotImplementedError


class PlainAffine(AffineSource):
    conditioned = False

    def __init__(self, channels: int):
        super().__init__()
        self.channels = channels
        self.weight = nn.Parameter(torch.ones(channels))
        self.bias = nn.Parameter(torch.zeros(channels))

    def forward(  # type: ignore[override]
        self, classes: Optional[torch.Tensor], batch: int
    ) -> Tuple[torch.Tensor, torch.Tensor]:
        return self.weight, self.bias


class ConditionalNorm(nn.Module):
    """Normalization slot shared by the image encoder and voxel decoder."""

    def __init__(self, spec: BNLayerSpec, affine: AffineSource):
        super().__init__()
        if affine.channels != spec.channels:
            raise DimensionError(
                "affine channels", spec.channels, affine.channels
            )
        self.spec = spec
        self.affine = affine
        self.register_buffer("running_mean", torch.zeros(spec.channels))
        self.register_buffer("running_var", torch.ones(spec.channels))

    @property
    def conditioned(self) -> bool:
        return self.affine.conditioned

    def forward(  # type: ignore[override]
        self, x: torch.Tensor, classes: Optional[torch.Tensor] = None
    ) -> torch.Tensor:
        if self.conditioned and classes is None:
            raise ConfigurationError(
                "Class conditioning is required by a conditioned "
                "normalization layer"
            )
        gamma, beta = self.affine(classes, x.size(0))
        return cond_batchnorm(
            x,
            self.running_mean,
            self.running_var,
            gamma,
            beta,
            self.training,
            self.spec.momentum,
            self.spec.epsilon,
        )


# (layer id, channels) -> normalization slot
NormFactory = Callable[[str, int], ConditionalNorm]


def plain_norm_factory(layer_id: str, channels: int) -> ConditionalNorm:
    return ConditionalNorm(BNLayerSpec(channels), PlainAffine(channels))
