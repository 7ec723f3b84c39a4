"""Multi-scale class embeddings: per-class batch-norm affine rows."""
from typing import Dict, Iterator, List, Mapping, Optional, Tuple

import torch
from torch import nn

from fewshape.core.const import CBN_INIT_MEAN, CBN_INIT_STD
from fewshape.core.helpers import torch_generator
from fewshape.exceptions import ClassLookupError, ConfigurationError
from fewshape.nn.norm import AffineSource, check_class_indices
from fewshape.priors.base import ClassTable
from fewshape.priors.registry import ClassRegistry

__all__ = ["ClassAffineBank", "CBNBank", "mcce_params"]


def _normal(*size: int, generator: torch.Generator) -> torch.Tensor:
    return torch.empty(*size).normal_(
        CBN_INIT_MEAN, CBN_INIT_STD, generator=generator
    )


class ClassAffineBank(ClassTable, AffineSource):
    """(γ, β) rows of one conditioned normalization layer."""

    class_state = ("gamma", "beta")
    trainable_rows = ("gamma", "beta")

    def __init__(
        self,
        registry: ClassRegistry,
        layer_id: str,
        channels: int,
        seed: int = 0,
    ):
        super().__init__(registry, layer_id, seed)
        self.channels = channels
        g = torch_generator(seed, "cbn", layer_id)
        n = len(registry)
        self.gamma = nn.Parameter(_normal(n, channels, generator=g))
        self.beta = nn.Parameter(_normal(n, channels, generator=g))

    def forward(  # type: ignore[override]
        self, classes: Optional[torch.Tensor], batch: int
    ) -> Tuple[torch.Tensor, torch.Tensor]:
        if classes is None:
            raise ConfigurationError(
                f"Layer {self.layer_id!r} needs class conditioning"
            )
        check_class_indices(classes, len(self.registry))
        return self.gamma[classes], self.beta[classes]

    def row(self, class_id: str) -> Tuple[torch.Tensor, torch.Tensor]:
        i = self.registry.index(class_id)
        return self.gamma[i], self.beta[i]

    def reinitialize_class(self, class_id: str, seed: int) -> None:
        i = self.registry.index(class_id)
        g = torch_generator(seed, "cbn", self.layer_id, class_id)
        with torch.no_grad():
            self.gamma[i] = _normal(self.channels, generator=g)
            self.beta[i] = _normal(self.channels, generator=g)


class CBNBank(Mapping[str, ClassAffineBank]):
    """Read-only view of every per-class affine bank of a model."""

    def __init__(self, banks: Mapping[str, ClassAffineBank]):
        self._banks: Dict[str, ClassAffineBank] = dict(banks)

    @classmethod
    def of(cls, module: nn.Module) -> "CBNBank":
        return cls(
            {
                m.layer_id: m
                for m in module.modules()
                if isinstance(m, ClassAffineBank)
            }
        )

    def __getitem__(self, layer_id: str) -> ClassAffineBank:
        try:
            return self._banks[layer_id]
        except KeyError:
            raise ClassLookupError(
                [layer_id], "No class affine rows for layer"
            ) from None

    def __iter__(self) -> Iterator[str]:
        return iter(self._banks)

    def __len__(self) -> int:
        return len(self._banks)

    @property
    def layer_ids(self) -> List[str]:
        return list(self._banks)


def mcce_params(
    bank: CBNBank, class_id: str, layer_id: str
) -> Tuple[torch.Tensor, torch.Tensor]:
    return bank[layer_id].row(class_id)
