from fewshape.priors.average_shape import (
    AverageShapePrior,
    wallace_encode,
    wallace_prior,
)
from fewshape.priors.base import ClassTable
from fewshape.priors.cab import CodebookAffine, cab_modulation, cab_tables
from fewshape.priors.cgce import (
    AttentionTable,
    CodebookSet,
    CompositionalEmbedding,
    attention_alignment,
    codebook_contribution,
    compose_cgce,
    knockout_codebook,
)
from fewshape.priors.gce import GlobalEmbeddingTable, compose_gce
from fewshape.priors.mcce import CBNBank, ClassAffineBank, mcce_params
from fewshape.priors.registry import ClassRegistry
from fewshape.priors.variants import (
    CLI_VARIANTS,
    PLACEMENT_SWEEP,
    SHOT_SWEEP,
    Embedding,
    Placement,
    PriorKind,
    PriorVariant,
)

__all__ = [
    "ClassRegistry",
    "ClassTable",
    "PriorKind",
    "PriorVariant",
    "Placement",
    "Embedding",
    "PLACEMENT_SWEEP",
    "SHOT_SWEEP",
    "CLI_VARIANTS",
    "GlobalEmbeddingTable",
    "CodebookSet",
    "AttentionTable",
    "CompositionalEmbedding",
    "ClassAffineBank",
    "CBNBank",
    "CodebookAffine",
    "AverageShapePrior",
    "compose_gce",
    "compose_cgce",
    "knockout_codebook",
    "codebook_contribution",
    "attention_alignment",
    "wallace_prior",
    "wallace_encode",
    "mcce_params",
    "cab_modulation",
    "cab_tables",
]
