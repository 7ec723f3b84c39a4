"""Codebook attention blocks.

Each block owns its codebooks (code length twice the channel count of the
layer it modulates) and a class attention table; the attended code is split
into the batch-norm scale and shift.
"""
from typing import Dict, Mapping, Optional, Tuple

import torch
from torch import nn

from fewshape.core.const import CODES_PER_BOOK, NUM_CODEBOOKS
from fewshape.exceptions import ConfigurationError, DimensionError
from fewshape.nn.norm import AffineSource, check_class_indices
from fewshape.priors.base import ClassTable
from fewshape.priors.cgce import AttentionTable, CodebookSet
from fewshape.priors.registry import ClassRegistry

__all__ = ["CodebookAffine", "cab_modulation", "cab_tables"]


def _split(attended: torch.Tensor) -> Tuple[torch.Tensor, torch.Tensor]:
    channels = attended.size(-1) // 2
    return attended[..., :channels], attended[..., channels:]


class CodebookAffine(ClassTable, AffineSource):
    class_state = ("attention.logits",)
    trainable_rows = ("attention.logits",)

    def __init__(
        self,
        registry: ClassRegistry,
        layer_id: str,
        channels: int,
        num_codebooks: int = NUM_CODEBOOKS,
        codes_per_book: int = CODES_PER_BOOK,
        seed: int = 0,
    ):
        super().__init__(registry, layer_id, seed)
        self.channels = channels
        self.codes = CodebookSet(
            num_codebooks, codes_per_book, 2 * channels, seed, layer_id
        )
        self.attention = AttentionTable(
            registry, num_codebooks, codes_per_book, seed, layer_id
        )

    def forward(  # type: ignore[override]
        self, classes: Optional[torch.Tensor], batch: int
    ) -> Tuple[torch.Tensor, torch.Tensor]:
        if classes is None:
            raise ConfigurationError(
                f"Layer {self.layer_id!r} needs class conditioning"
            )
        check_class_indices(classes, len(self.registry))
        a = self.attention.activated(classes)
        return _split(torch.einsum("bjk,jkd->bd", a, self.codes.codes))

    def reinitialize_class(self, class_id: str, seed: int) -> None:
        self.attention.redraw(class_id, seed)


def cab_tables(
    module: nn.Module,
) -> Tuple[Dict[str, CodebookSet], Dict[str, AttentionTable]]:
    """Codebooks and attention tables of every block, keyed by layer id."""
    codes: Dict[str, CodebookSet] = {}
    attn: Dict[str, AttentionTable] = {}
    for m in module.modules():
        if isinstance(m, CodebookAffine):
            codes[m.layer_id] = m.codes
            attn[m.layer_id] = m.attention
    return codes, attn


def cab_modulation(
    codes: Mapping[str, CodebookSet],
    attn: Mapping[str, AttentionTable],
    class_id: str,
    layer_id: str,
) -> Tuple[torch.Tensor, torch.Tensor]:
    if layer_id not in codes or layer_id not in attn:
        raise ConfigurationError(
            f"Layer {layer_id!r} is not conditioned by a codebook block"
        )
    book, table = codes[layer_id], attn[layer_id]
    if book.dim % 2:
        raise DimensionError("code length parity", "even", book.dim)
    a = table.for_class(class_id)
    return _split(torch.einsum("jk,jkd->d", a, book.codes))
