"""Global class embeddings: one learned vector per class."""
import torch
from torch import nn

from fewshape.core.const import EMBEDDING_DIM, Role
from fewshape.core.helpers import torch_generator
from fewshape.priors.base import ClassTable
from fewshape.priors.registry import ClassRegistry

__all__ = ["GlobalEmbeddingTable", "compose_gce"]


class GlobalEmbeddingTable(ClassTable):
    class_state = ("embeddings",)
    trainable_rows = ("embeddings",)

    def __init__(
        self,
        registry: ClassRegistry,
        dim: int = EMBEDDING_DIM,
        seed: int = 0,
        layer_id: str = "embedding",
    ):
        super().__init__(registry, layer_id, seed)
        g = torch_generator(seed, "gce", layer_id)
        self.embeddings = nn.Parameter(
            torch.randn(len(registry), dim, generator=g)
        )

    @property
    def dim(self) -> int:
        return self.embeddings.size(1)

    def forward(self, classes: torch.Tensor) -> torch.Tensor:  # type: ignore
        return self.embeddings[classes]

    def reinitialize_class(self, class_id: str, seed: int) -> None:
        i = self.registry.index(class_id)
        with torch.no_grad():
            novel = self.registry.role(class_id) is Role.NOVEL
            if novel and self.registry.base:
                base = self.embeddings[self.registry.base_indices()]
                self.embeddings[i] = base.mean(dim=0)
            else:
                g = torch_generator(seed, "gce", self.layer_id, class_id)
                self.embeddings[i] = torch.randn(self.dim, generator=g)


def compose_gce(table: GlobalEmbeddingTable, class_id: str) -> torch.Tensor:
    """The class embedding e_S, to be concatenated with the image code."""
    return table.embeddings[table.registry.index(class_id)]
