from fewshape.training.adapt import (
    AdaptResult,
    ParameterCensus,
    adapt_novel,
    parameter_census,
    snapshot,
)
from fewshape.training.base import train_base
from fewshape.training.config import AdaptConfig, Optimizer, TrainConfig
from fewshape.training.episode import FewShotEpisode, load_pairs, make_episode
from fewshape.training.inference import batch_iou, predict, predict_batch
from fewshape.training.onn import onn_expected_score, onn_retrieve
from fewshape.training.records import LossCurve, LossRecord, RunDescriptor

__all__ = [
    "TrainConfig",
    "AdaptConfig",
    "Optimizer",
    "FewShotEpisode",
    "make_episode",
    "load_pairs",
    "train_base",
    "adapt_novel",
    "AdaptResult",
    "ParameterCensus",
    "parameter_census",
    "snapshot",
    "predict",
    "predict_batch",
    "batch_iou",
    "onn_retrieve",
    "onn_expected_score",
    "LossCurve",
    "LossRecord",
    "RunDescriptor",
]
