from fewshape.nn.checkpoint import load_checkpoint, save_checkpoint
from fewshape.nn.decoder import DecoderConfig, VoxelDecoder, decode_shape
from fewshape.nn.encoder import EncoderConfig, ImageEncoder, encode_image
from fewshape.nn.loss import bce_loss, voxel_bce
from fewshape.nn.norm import (
    AffineSource,
    BNLayerSpec,
    Conditioning,
    ConditionalNorm,
    NormFactory,
    PlainAffine,
    cond_batchnorm,
    plain_norm_factory,
)
from fewshape.nn.shape_encoder import ShapeEncoder
from fewshape.nn.sparsemax import sparsemax, sparsemax_jvp

__all__ = [
    "EncoderConfig",
    "DecoderConfig",
    "BNLayerSpec",
    "Conditioning",
    "ImageEncoder",
    "VoxelDecoder",
    "ShapeEncoder",
    "save_checkpoint",
    "load_checkpoint",
    "ConditionalNorm",
    "AffineSource",
    "PlainAffine",
    "NormFactory",
    "plain_norm_factory",
    "encode_image",
    "decode_shape",
    "bce_loss",
    "voxel_bce",
    "cond_batchnorm",
    "sparsemax",
    "sparsemax_jvp",
]
