"""Image-to-voxel reconstruction network with a pluggable class prior."""
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Tuple, Union

import torch
from mashumaro import DataClassDictMixin
from torch import nn

from fewshape import __version__
from fewshape.config import RecordConfig
from fewshape.core.const import (
    CODES_PER_BOOK,
    EMBEDDING_DIM,
    IMAGE_SIZE,
    NUM_CODEBOOKS,
    RESOLUTION,
)
from fewshape.core.helpers import derive_seed
from fewshape.exceptions import (
    ClassLookupError,
    ConfigurationError,
    ParameterError,
)
from fewshape.nn.checkpoint import load_checkpoint, save_checkpoint
from fewshape.nn.decoder import SEED_SIZE, DecoderConfig, VoxelDecoder
from fewshape.nn.encoder import EncoderConfig, ImageEncoder
from fewshape.nn.norm import (
    BNLayerSpec,
    Conditioning,
    ConditionalNorm,
    NormFactory,
    plain_norm_factory,
)
from fewshape.priors.average_shape import AverageShapePrior
from fewshape.priors.base import ClassTable
from fewshape.priors.cab import CodebookAffine
from fewshape.priors.cgce import CompositionalEmbedding
from fewshape.priors.gce import GlobalEmbeddingTable
from fewshape.priors.mcce import ClassAffineBank
from fewshape.priors.registry import ClassRegistry
from fewshape.priors.variants import Embedding, PriorKind, PriorVariant

__all__ = ["ModelConfig", "ReconstructionModel"]

logger = logging.getLogger(__name__)


@dataclass
class ModelConfig(DataClassDictMixin):
    variant: PriorKind = PriorKind.NONE
    image_size: int = IMAGE_SIZE
    resolution: int = RESOLUTION
    embedding_dim: int = EMBEDDING_DIM
    width_scale: float = 1.0
    num_codebooks: int = NUM_CODEBOOKS
    codes_per_book: int = CODES_PER_BOOK
    single_shape_prior: bool = False
    seed: int = 0

    class Config(RecordConfig):
        pass

    def __post_init__(self) -> None:
        if self.single_shape_prior and self.variant != PriorKind.WALLACE_AVG:
            raise ConfigurationError(
                "single_shape_prior only applies to the wallace_avg variant"
            )
        if self.num_codebooks < 1 or self.codes_per_book < 1:
            raise ParameterError(
                "codebooks",
                (self.num_codebooks, self.codes_per_book),
                "sizes must be >= 1",
            )

    @property
    def prior_variant(self) -> PriorVariant:
        return PriorVariant(self.variant)

    @property
    def decoder_input_dim(self) -> int:
        if self.prior_variant.concatenates:
            return 2 * self.embedding_dim
        return self.embedding_dim

    def encoder_config(self) -> EncoderConfig:
        return EncoderConfig(
            input_size=self.image_size,
            embedding_dim=self.embedding_dim,
            width_scale=self.width_scale,
            conditioning=self.prior_variant.placement.encoder,
        )

    def decoder_config(self) -> DecoderConfig:
        ups = math.log2(self.resolution / SEED_SIZE)
        return DecoderConfig(
            output_resolution=self.resolution,
            num_layers=2 * int(ups) + 1 if ups == int(ups) else 0,
            input_dim=self.decoder_input_dim,
            width_scale=self.width_scale,
            conditioning=self.prior_variant.placement.decoder,
        )


class ReconstructionModel(nn.Module):
    """``S = D(E_I(I), e_S)`` with the class prior chosen by the variant.

    GCE and CGCE embeddings are concatenated with the image code, the
    average-shape code is added to it, and MCCE/CAB conditioning lives in
    the normalization layers of the encoder and decoder.
    """

    def __init__(self, config: ModelConfig, registry: ClassRegistry):
        super().__init__()
        self.config = config
        self.registry = registry
        self.variant = config.prior_variant
        placement = self.variant.placement
        with torch.random.fork_rng(devices=[]):
            torch.manual_seed(derive_seed(config.seed, "init"))
            self.encoder = ImageEncoder(
                config.encoder_config(), self._norm_factory(placement.encoder)
            )
            self.decoder = VoxelDecoder(
                config.decoder_config(), self._norm_factory(placement.decoder)
            )
            self.prior = self._build_prior(placement.embedding)
        self.register_buffer(
            "ready", torch.zeros(len(registry), dtype=torch.bool)
        )

    def _norm_factory(self, mode: Conditioning) -> NormFactory:
        cfg, registry = self.config, self.registry

        def factory(layer_id: str, channels: int) -> ConditionalNorm:
            spec = BNLayerSpec(channels)
            if mode is Conditioning.CBN:
                return ConditionalNorm(
                    spec,
                    ClassAffineBank(registry, layer_id, channels, cfg.seed),
                )
            if mode is Conditioning.CAB:
                return ConditionalNorm(
                    spec,
                    CodebookAffine(
                        registry,
                        layer_id,
                        channels,
                        cfg.num_codebooks,
                        cfg.codes_per_book,
                        cfg.seed,
                    ),
                )
            return plain_norm_factory(layer_id, channels)

        return factory

    def _build_prior(self, embedding: Embedding) -> Optional[ClassTable]:
        cfg = self.config
        if embedding is Embedding.GCE:
            return GlobalEmbeddingTable(
                self.registry, cfg.embedding_dim, cfg.seed
            )
        if embedding is Embedding.CGCE:
            return CompositionalEmbedding(
                self.registry,
                cfg.num_codebooks,
                cfg.codes_per_book,
                cfg.embedding_dim,
                cfg.seed,
            )
        if embedding is Embedding.AVERAGE_SHAPE:
            return AverageShapePrior(
                self.registry,
                cfg.resolution,
                cfg.embedding_dim,
                cfg.width_scale,
                cfg.single_shape_prior,
                cfg.seed,
            )
        return None

    @property
    def kind(self) -> PriorKind:
        return self.variant.kind

    @property
    def class_conditioned(self) -> bool:
        return self.variant.class_conditioned

    def tables(self) -> Dict[str, ClassTable]:
        """Every class-conditioning store keyed by its module path."""
        return {
            name: m
            for name, m in self.named_modules()
            if isinstance(m, ClassTable)
        }

    def forward(  # type: ignore[override]
        self, images: torch.Tensor, classes: Optional[torch.Tensor] = None
    ) -> torch.Tensor:
        if not self.class_conditioned:
            classes = None
        elif classes is None:
            raise ConfigurationError(
                f"Variant {self.kind.value} needs class indices"
            )
        z = self.encoder(images, classes)
        if self.prior is not None:
            e_s = self.prior(classes)
            if self.variant.concatenates:
                z = torch.cat([z, e_s], dim=1)
            else:
                z = z + e_s
        return self.decoder(z, classes)

    def check_ready(self, classes: torch.Tensor) -> None:
        if not self.class_conditioned:
            return
        missing = sorted(
            {int(i) for i in classes.tolist() if not bool(self.ready[i])}
        )
        if missing:
            raise ClassLookupError(
                self.registry.ids_for(missing),
                "No class conditioning has been learned for",
            )

    def mark_ready(self, class_ids: Iterable[str]) -> None:
        self.ready[self.registry.indices(list(class_ids))] = True

    def ready_classes(self) -> List[str]:
        return self.registry.ids_for(
            torch.nonzero(self.ready).flatten().tolist()
        )

    def reinitialize_classes(self, class_ids: Iterable[str], seed: int):
        class_ids = list(class_ids)
        for table in self.tables().values():
            table.reinitialize_classes(class_ids, seed)
        self.ready[self.registry.indices(class_ids)] = False

    def adaptable_parameters(self) -> Dict[str, nn.Parameter]:
        params: Dict[str, nn.Parameter] = {}
        for prefix, table in self.tables().items():
            for name, p in table.adaptable_parameters().items():
                params[f"{prefix}.{name}"] = p
        return params

    @property
    def namespace(self) -> str:
        return f"priors.{self.kind.value}"

    def checkpoint_state(self) -> Dict[str, torch.Tensor]:
        state = self.state_dict()
        archive: Dict[str, torch.Tensor] = {}
        for prefix, table in self.tables().items():
            local = table.state_dict()
            for key, (name, row) in table.checkpoint_entries(
                self.namespace
            ).items():
                value = local[name]
                archive[key] = value if row is None else value[row].clone()
                state.pop(f"{prefix}.{name}", None)
        archive.update(state)
        return archive

    def load_checkpoint_state(self, archive: Dict[str, torch.Tensor]):
        archive = dict(archive)
        full: Dict[str, torch.Tensor] = {}
        for prefix, table in self.tables().items():
            local = {k: v.clone() for k, v in table.state_dict().items()}
            for key, (name, row) in table.checkpoint_entries(
                self.namespace
            ).items():
                try:
                    value = archive.pop(key)
                except KeyError:
                    raise ConfigurationError(
                        f"Checkpoint has no entry {key!r}"
                    ) from None
                if row is None:
                    local[name] = value
                else:
                    local[name][row] = value
            full.update({f"{prefix}.{k}": v for k, v in local.items()})
        full.update(archive)
        try:
            self.load_state_dict(full)
        except RuntimeError as e:
            raise ConfigurationError(
                f"Checkpoint does not match the model: {e}"
            ) from e

    def header(self, **extra: Any) -> Dict[str, Any]:
        return {
            "model": self.config.to_dict(),
            "registry": self.registry.to_dict(),
            "version": __version__,
            **extra,
        }

    def save(self, path: Union[str, Path], **extra: Any) -> Path:
        return save_checkpoint(self, path, self.header(**extra))

    @classmethod
    def load(
        cls, path: Union[str, Path]
    ) -> Tuple["ReconstructionModel", Dict[str, Any]]:
        header, state = load_checkpoint(path)
        model = cls(
            ModelConfig.from_dict(header["model"]),
            ClassRegistry.from_dict(header["registry"]),
        )
        model.load_checkpoint_state(state)
        logger.debug("Loaded %s model from %s", model.kind.value, path)
        return model, header
