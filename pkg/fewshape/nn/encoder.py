"""ResNet-18-like image encoder."""
from dataclasses import dataclass
from typing import List, Optional

import torch
from mashumaro import DataClassDictMixin
from torch import nn

from fewshape.config import RecordConfig
from fewshape.core.const import EMBEDDING_DIM, IMAGE_SIZE
from fewshape.exceptions import (
    ConfigurationError,
    DimensionError,
    ParameterError,
)
from fewshape.nn.norm import (
    Conditioning,
    ConditionalNorm,
    NormFactory,
    plain_norm_factory,
)

__all__ = ["EncoderConfig", "ImageEncoder", "encode_image"]


@dataclass
class EncoderConfig(DataClassDictMixin):
    input_size: int = IMAGE_SIZE
    embedding_dim: int = EMBEDDING_DIM
    width_scale: float = 1.0
    conditioning: Conditioning = Conditioning.NONE
    blocks_per_stage: int = 2

    class Config(RecordConfig):
        pass

    def __post_init__(self) -> None:
        if self.input_size < 16:
            raise ParameterError("input_size", self.input_size, "< 16")
        if self.embedding_dim < 1:
            raise ParameterError("embedding_dim", self.embedding_dim, "< 1")
        if not self.width_scale > 0:
            raise ParameterError("width_scale", self.width_scale, "<= 0")

    @property
    def stage_channels(self) -> List[int]:
        return [max(1, round(64 * self.width_scale * 2**i)) for i in range(4)]


class BasicBlock(nn.Module):
    def __init__(
        self,
        layer_id: str,
        in_channels: int,
        out_channels: int,
        stride: int,
        norm_factory: NormFactory,
    ):
        super().__init__()
        self.conv1 = nn.Conv2d(
            in_channels, out_channels, 3, stride, 1, bias=False
        )
        self.norm1 = norm_factory(f"{layer_id}.norm1", out_channels)
        self.conv2 = nn.Conv2d(out_channels, out_channels, 3, 1, 1, bias=False)
        self.norm2 = norm_factory(f"{layer_id}.norm2", out_channels)
        self.shortcut: Optional[nn.Conv2d] = None
        self.shortcut_norm: Optional[ConditionalNorm] = None
        if stride != 1 or in_channels != out_channels:
            self.shortcut = nn.Conv2d(
                in_channels, out_channels, 1, stride, bias=False
            )
            self.shortcut_norm = norm_factory(
                f"{layer_id}.shortcut_norm", out_channels
            )

    def forward(  # type: ignore[override]
        self, x: torch.Tensor, classes: Optional[torch.Tensor]
    ) -> torch.Tensor:
        out = torch.relu(self.norm1(self.conv1(x), classes))
        out = self.norm2(self.conv2(out), classes)
        identity = x
        if self.shortcut is not None and self.shortcut_norm is not None:
            identity = self.shortcut_norm(self.shortcut(x), classes)
        return torch.relu(out + identity)


class ImageEncoder(nn.Module):
    def __init__(
        self,
        config: EncoderConfig,
        norm_factory: NormFactory = plain_norm_factory,
    ):
        super().__init__()
        self.config = config
        channels = config.stage_channels
        self.stem = nn.Conv2d(3, channels[0], 7, 2, 3, bias=False)
        self.stem_norm = norm_factory("encoder.stem_norm", channels[0])
        self.pool = nn.MaxPool2d(3, 2, 1)
        blocks = []
        in_channels = channels[0]
        for stage, out_channels in enumerate(channels):
            for b in range(config.blocks_per_stage):
                stride = 2 if stage > 0 and b == 0 else 1
                blocks.append(
                    BasicBlock(
                        f"encoder.stage{stage}.block{b}",
                        in_channels,
                        out_channels,
                        stride,
                        norm_factory,
                    )
                )
                in_channels = out_channels
        self.blocks = nn.ModuleList(blocks)
        self.fc = nn.Linear(in_channels, config.embedding_dim)
        self.conditioned = any(
            m.conditioned
            for m in self.modules()
            if isinstance(m, ConditionalNorm)
        )
        if self.conditioned != (config.conditioning != Conditioning.NONE):
            raise ConfigurationError(
                f"Encoder conditioning {config.conditioning.value!r} does "
                "not match its normalization layers"
            )

    def forward(  # type: ignore[override]
        self, image: torch.Tensor, classes: Optional[torch.Tensor] = None
    ) -> torch.Tensor:
        size = self.config.input_size
        if image.dim() != 4 or tuple(image.shape[1:]) != (3, size, size):
            raise DimensionError(
                "image shape", f"(B, 3, {size}, {size})", tuple(image.shape)
            )
        if self.conditioned and classes is None:
            raise ConfigurationError(
                f"{self.config.conditioning.value} encoder needs class "
                "conditioning"
            )
        x = torch.relu(self.stem_norm(self.stem(image), classes))
        x = self.pool(x)
        for block in self.blocks:
            x = block(x, classes)
        x = x.mean(dim=(2, 3))
        return self.fc(x)


def encode_image(
    encoder: ImageEncoder,
    image: torch.Tensor,
    classes: Optional[torch.Tensor] = None,
) -> torch.Tensor:
    """Embed one H×W×3 image or a (B, 3, H, W) batch."""
    if image.dim() == 3 and image.shape[-1] == 3:
        image = image.permute(2, 0, 1).unsqueeze(0)
        return encoder(image, classes).squeeze(0)
    return encoder(image, classes)
