import math

import torch
from torch import nn

from fewshape.core.const import EMBEDDING_DIM
from fewshape.exceptions import DimensionError, ParameterError

__all__ = ["ShapeEncoder"]


class ShapeEncoder(nn.Module):
    """Small 3D conv encoder of a real-valued occupancy prior."""

    def __init__(
        self,
        resolution: int,
        embedding_dim: int = EMBEDDING_DIM,
        width_scale: float = 1.0,
    ):
        super().__init__()
        steps = math.log2(resolution / 4)
        if steps < 0 or steps != int(steps):
            raise ParameterError(
                "resolution", resolution, "must be 4·2^k for k >= 0"
            )
        self.resolution = resolution
        layers = []
        cin = 1
        for i in range(int(steps)):
            cout = max(1, round(32 * width_scale * 2**i))
            layers += [
                nn.Conv3d(cin, cout, 4, 2, 1, bias=False),
                nn.BatchNorm3d(cout),
                nn.ReLU(),
            ]
            cin = cout
        self.features = nn.Sequential(*layers)
        self.fc = nn.Linear(cin * 4**3, embedding_dim)

    def forward(self, prior: torch.Tensor) -> torch.Tensor:  # type: ignore
        r = self.resolution
        if tuple(prior.shape[1:]) != (r, r, r):
            raise DimensionError(
                "prior shape", f"(B, {r}, {r}, {r})", tuple(prior.shape)
            )
        x = self.features(prior.unsqueeze(1))
        return self.fc(x.flatten(1))
