"""Compositional class embeddings.

A class embedding is a sparse attention-weighted sum of codes drawn from a
small set of codebooks shared by every class. Only the attention logits are
class specific, so adapting to a novel class means fitting ``M × m``
scalars.
"""
import torch
from torch import nn

from fewshape.core.const import (
    CODES_PER_BOOK,
    EMBEDDING_DIM,
    NUM_CODEBOOKS,
    UNIFORM_INIT_BOUND,
)
from fewshape.core.helpers import torch_generator
from fewshape.exceptions import DimensionError, ParameterError
from fewshape.nn.sparsemax import sparsemax
from fewshape.priors.base import ClassTable
from fewshape.priors.registry import ClassRegistry

__all__ = [
    "CodebookSet",
    "AttentionTable",
    "CompositionalEmbedding",
    "compose_cgce",
    "knockout_codebook",
    "codebook_contribution",
    "attention_alignment",
]


def _uniform(*size: int, generator: torch.Generator) -> torch.Tensor:
    b = UNIFORM_INIT_BOUND
    return torch.empty(*size).uniform_(-b, b, generator=generator)


class CodebookSet(nn.Module):
    def __init__(
        self,
        num_codebooks: int = NUM_CODEBOOKS,
        codes_per_book: int = CODES_PER_BOOK,
        dim: int = EMBEDDING_DIM,
        seed: int = 0,
        tag: str = "codes",
    ):
        super().__init__()
        for name, value in (
            ("num_codebooks", num_codebooks),
            ("codes_per_book", codes_per_book),
            ("dim", dim),
        ):
            if value < 1:
                raise ParameterError(name, value, "must be >= 1")
        g = torch_generator(seed, "codebooks", tag)
        self.codes = nn.Parameter(
            _uniform(num_codebooks, codes_per_book, dim, generator=g)
        )

    @property
    def num_codebooks(self) -> int:
        return self.codes.size(0)

    @property
    def codes_per_book(self) -> int:
        return self.codes.size(1)

    @property
    def dim(self) -> int:
        return self.codes.size(2)


class AttentionTable(nn.Module):
    """Raw attention logits, one ``M × m`` block per class."""

    def __init__(
        self,
        registry: ClassRegistry,
        num_codebooks: int = NUM_CODEBOOKS,
        codes_per_book: int = CODES_PER_BOOK,
        seed: int = 0,
        tag: str = "attention",
    ):
        super().__init__()
        self.registry = registry
        self.tag = tag
        g = torch_generator(seed, "attention", tag)
        self.logits = nn.Parameter(
            _uniform(
                len(registry), num_codebooks, codes_per_book, generator=g
            )
        )

    def activated(self, classes: torch.Tensor) -> torch.Tensor:
        """Sparsemax attention per (class, codebook), shape (B, M, m)."""
        return sparsemax(self.logits[classes], dim=-1)

    def for_class(self, class_id: str) -> torch.Tensor:
        i = self.registry.index(class_id)
        return sparsemax(self.logits[i], dim=-1)

    def redraw(self, class_id: str, seed: int) -> None:
        i = self.registry.index(class_id)
        g = torch_generator(seed, "attention", self.tag, class_id)
        with torch.no_grad():
            self.logits[i] = _uniform(
                *self.logits.shape[1:], generator=g
            )


def _check_pair(codes: CodebookSet, attn: AttentionTable) -> None:
    expected = (codes.num_codebooks, codes.codes_per_book)
    if tuple(attn.logits.shape[1:]) != expected:
        raise DimensionError(
            "attention block shape", expected, tuple(attn.logits.shape[1:])
        )


def _combine(attention: torch.Tensor, codes: torch.Tensor) -> torch.Tensor:
    return torch.einsum("...jk,jkd->...d", attention, codes)


class CompositionalEmbedding(ClassTable):
    class_state = ("attention.logits",)
    trainable_rows = ("attention.logits",)

    def __init__(
        self,
        registry: ClassRegistry,
        num_codebooks: int = NUM_CODEBOOKS,
        codes_per_book: int = CODES_PER_BOOK,
        dim: int = EMBEDDING_DIM,
        seed: int = 0,
        layer_id: str = "embedding",
    ):
        super().__init__(registry, layer_id, seed)
        self.codes = CodebookSet(
            num_codebooks, codes_per_book, dim, seed, layer_id
        )
        self.attention = AttentionTable(
            registry, num_codebooks, codes_per_book, seed, layer_id
        )

    @property
    def dim(self) -> int:
        return self.codes.dim

    def forward(self, classes: torch.Tensor) -> torch.Tensor:  # type: ignore
        return _combine(self.attention.activated(classes), self.codes.codes)

    def reinitialize_class(self, class_id: str, seed: int) -> None:
        self.attention.redraw(class_id, seed)


def compose_cgce(
    codes: CodebookSet, attn: AttentionTable, class_id: str
) -> torch.Tensor:
    """e_S = Σ_j Σ_k sparsemax(w_j)_k · c_{j,k}; differentiable in both."""
    _check_pair(codes, attn)
    return _combine(attn.for_class(class_id), codes.codes)


def codebook_contribution(
    codes: CodebookSet, attn: AttentionTable, class_id: str, j: int
) -> torch.Tensor:
    _check_pair(codes, attn)
    if not 0 <= j < codes.num_codebooks:
        raise ParameterError(
            "j", j, f"codebook index not in [0, {codes.num_codebooks})"
        )
    a = attn.for_class(class_id)[j]
    return a @ codes.codes[j]


def knockout_codebook(
    codes: CodebookSet, attn: AttentionTable, class_id: str, j: int
) -> torch.Tensor:
    """Class embedding with codebook ``j`` (0-based) left out."""
    _check_pair(codes, attn)
    if not 0 <= j < codes.num_codebooks:
        raise ParameterError(
            "j", j, f"codebook index not in [0, {codes.num_codebooks})"
        )
    a = attn.for_class(class_id)
    keep = torch.ones(codes.num_codebooks, 1, dtype=a.dtype)
    keep[j] = 0.0
    return _combine(a * keep, codes.codes)


def attention_alignment(
    attn: AttentionTable, class_a: str, class_b: str
) -> float:
    """Cosine similarity of two classes' activated attention."""
    with torch.no_grad():
        a = attn.for_class(class_a).flatten().double()
        b = attn.for_class(class_b).flatten().double()
        return float(torch.dot(a, b) / (a.norm() * b.norm()))
