"""Voxel decoder: 4³ feature volume, nearest ×2 upsampling, 3D convs."""
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import torch
import torch.nn.functional as F
from mashumaro import DataClassDictMixin
from torch import nn

from fewshape.config import RecordConfig
from fewshape.core.const import EMBEDDING_DIM, NUM_DECODER_CONVS, RESOLUTION
from fewshape.exceptions import (
    ConfigurationError,
    DimensionError,
    ParameterError,
)
from fewshape.nn.norm import Conditioning, NormFactory, plain_norm_factory
from fewshape.voxels.grid import OccupancyField

__all__ = ["DecoderConfig", "VoxelDecoder", "decode_shape"]

SEED_SIZE = 4


@dataclass
class DecoderConfig(DataClassDictMixin):
    output_resolution: int = RESOLUTION
    num_layers: int = NUM_DECODER_CONVS
    input_dim: int = EMBEDDING_DIM
    width_scale: float = 1.0
    conditioning: Conditioning = Conditioning.NONE

    class Config(RecordConfig):
        pass

    def __post_init__(self) -> None:
        ups = math.log2(self.output_resolution / SEED_SIZE)
        if ups < 1 or ups != int(ups):
            raise ParameterError(
                "output_resolution",
                self.output_resolution,
                f"must be {SEED_SIZE}·2^u with u >= 1",
            )
        if self.num_layers != 2 * int(ups) + 1:
            raise ParameterError(
                "num_layers",
                self.num_layers,
                f"resolution {self.output_resolution} needs "
                f"{2 * int(ups) + 1} conv layers",
            )
        if self.input_dim % SEED_SIZE**3:
            raise ParameterError(
                "input_dim", self.input_dim, f"not divisible by {SEED_SIZE}^3"
            )
        if not self.width_scale > 0:
            raise ParameterError("width_scale", self.width_scale, "<= 0")

    @property
    def upsamplings(self) -> int:
        return int(round(math.log2(self.output_resolution / SEED_SIZE)))

    def layer_plan(self) -> List[Tuple[int, int, bool]]:
        """(in channels, out channels, upsample before) per conv layer."""
        u = self.upsamplings
        width = [
            max(1, round(256 * self.width_scale / 2**i)) for i in range(u + 1)
        ]
        plan = [(self.input_dim // SEED_SIZE**3, width[0], False)]
        for i in range(1, u + 1):
            plan.append((width[i - 1], width[i], True))
            if i < u:
                plan.append((width[i], width[i], False))
        plan.append((width[u], 1, False))
        return plan


class VoxelDecoder(nn.Module):
    def __init__(
        self,
        config: DecoderConfig,
        norm_factory: NormFactory = plain_norm_factory,
    ):
        super().__init__()
        self.config = config
        plan = config.layer_plan()
        self.upsample_before = [up for _, _, up in plan]
        self.convs = nn.ModuleList(
            nn.Conv3d(cin, cout, 3, 1, 1) for cin, cout, _ in plan
        )
        self.norms = nn.ModuleList(
            norm_factory(f"decoder.norm{i}", cout)
            for i, (_, cout, _) in enumerate(plan[:-1])
        )
        self.conditioned = any(n.conditioned for n in self.norms)
        if self.conditioned != (config.conditioning != Conditioning.NONE):
            raise ConfigurationError(
                f"Decoder conditioning {config.conditioning.value!r} does "
                "not match its normalization layers"
            )

    @property
    def final(self) -> nn.Conv3d:
        return self.convs[-1]  # type: ignore[return-value]

    def forward(  # type: ignore[override]
        self, z: torch.Tensor, classes: Optional[torch.Tensor] = None
    ) -> torch.Tensor:
        if z.dim() != 2 or z.size(1) != self.config.input_dim:
            raise DimensionError(
                "decoder input length", self.config.input_dim, z.shape[-1]
            )
        if self.conditioned and classes is None:
            raise ConfigurationError("CBN decoder needs class conditioning")
        x = z.reshape(z.size(0), -1, SEED_SIZE, SEED_SIZE, SEED_SIZE)
        for i, conv in enumerate(self.convs):
            if self.upsample_before[i]:
                x = F.interpolate(x, scale_factor=2, mode="nearest")
            x = conv(x)
            if i < len(self.norms):
                x = torch.relu(self.norms[i](x, classes))
        return torch.sigmoid(x.squeeze(1))


def decode_shape(
    decoder: VoxelDecoder,
    z: torch.Tensor,
    classes: Optional[torch.Tensor] = None,
) -> OccupancyField:
    """Decode a single input vector into an occupancy field."""
    if z.dim() != 1:
        raise DimensionError("input vector rank", 1, z.dim())
    if z.numel() != decoder.config.input_dim:
        raise DimensionError(
            "decoder input length", decoder.config.input_dim, z.numel()
        )
    with torch.no_grad():
        p = decoder(z.unsqueeze(0), classes)[0]
    return OccupancyField(p.double().cpu().numpy())
