import enum
from dataclasses import dataclass
from typing import Dict, Tuple

from fewshape.nn.norm import Conditioning

__all__ = [
    "PriorKind",
    "Embedding",
    "Placement",
    "PriorVariant",
    "PLACEMENT_SWEEP",
    "SHOT_SWEEP",
    "CLI_VARIANTS",
]


class PriorKind(str, enum.Enum):
    NONE = "none"
    WALLACE_AVG = "wallace_avg"
    GCE = "GCE"
    CGCE = "CGCE"
    MCCE_DEC = "MCCE_dec"
    MCCE_FULL = "MCCE_full"
    MCCE_ENC = "MCCE_enc"
    HYBRID = "Hybrid"
    CAB_ENC = "CAB_enc"
    CAB_DEC = "CAB_dec"
    CAB_FULL = "CAB_full"


class Embedding(str, enum.Enum):
    NONE = "none"
    AVERAGE_SHAPE = "average_shape"
    GCE = "gce"
    CGCE = "cgce"


@dataclass(frozen=True)
class Placement:
    embedding: Embedding
    encoder: Conditioning
    decoder: Conditioning


_N, _CBN, _CAB = Conditioning.NONE, Conditioning.CBN, Conditioning.CAB

_PLACEMENTS: Dict[PriorKind, Tuple[Embedding, Conditioning, Conditioning]] = {
    PriorKind.NONE: (Embedding.NONE, _N, _N),
    PriorKind.WALLACE_AVG: (Embedding.AVERAGE_SHAPE, _N, _N),
    PriorKind.GCE: (Embedding.GCE, _N, _N),
    PriorKind.CGCE: (Embedding.CGCE, _N, _N),
    PriorKind.MCCE_DEC: (Embedding.NONE, _N, _CBN),
    PriorKind.MCCE_FULL: (Embedding.NONE, _CBN, _CBN),
    PriorKind.MCCE_ENC: (Embedding.NONE, _CBN, _N),
    PriorKind.HYBRID: (Embedding.NONE, _CAB, _CBN),
    PriorKind.CAB_ENC: (Embedding.NONE, _CAB, _N),
    PriorKind.CAB_DEC: (Embedding.NONE, _N, _CAB),
    PriorKind.CAB_FULL: (Embedding.NONE, _CAB, _CAB),
}


@dataclass(frozen=True)
class PriorVariant:
    kind: PriorKind

    @property
    def placement(self) -> Placement:
        return Placement(*_PLACEMENTS[self.kind])

    @property
    def class_conditioned(self) -> bool:
        p = self.placement
        return (
            p.embedding is not Embedding.NONE
            or p.encoder is not Conditioning.NONE
            or p.decoder is not Conditioning.NONE
        )

    @property
    def concatenates(self) -> bool:
        return self.placement.embedding in (Embedding.GCE, Embedding.CGCE)

    @property
    def uses_codebooks(self) -> bool:
        p = self.placement
        return (
            p.embedding is Embedding.CGCE
            or Conditioning.CAB in (p.encoder, p.decoder)
        )


# CAB/CBN placement configurations compared against each other
PLACEMENT_SWEEP = (
    PriorKind.MCCE_ENC,
    PriorKind.MCCE_DEC,
    PriorKind.MCCE_FULL,
    PriorKind.CAB_ENC,
    PriorKind.CAB_DEC,
    PriorKind.CAB_FULL,
    PriorKind.CGCE,
    PriorKind.HYBRID,
)


# class-conditioned priors compared across shot counts
SHOT_SWEEP = (
    PriorKind.WALLACE_AVG,
    PriorKind.GCE,
    PriorKind.CGCE,
    PriorKind.HYBRID,
)


# command-line variant names; ``zs`` and ``as`` differ only in training data
CLI_VARIANTS: Dict[str, PriorKind] = {
    "zs": PriorKind.NONE,
    "as": PriorKind.NONE,
    "wallace": PriorKind.WALLACE_AVG,
    "gce": PriorKind.GCE,
    "cgce": PriorKind.CGCE,
    "mcce-dec": PriorKind.MCCE_DEC,
    "mcce-full": PriorKind.MCCE_FULL,
    "mcce-enc": PriorKind.MCCE_ENC,
    "hybrid": PriorKind.HYBRID,
    "cab-enc": PriorKind.CAB_ENC,
    "cab-dec": PriorKind.CAB_DEC,
    "cab-full": PriorKind.CAB_FULL,
}
