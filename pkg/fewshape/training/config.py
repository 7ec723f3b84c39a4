import enum
from dataclasses import dataclass

from mashumaro import DataClassDictMixin

from fewshape.config import RecordConfig
from fewshape.exceptions import ParameterError

__all__ = ["Optimizer", "TrainConfig", "AdaptConfig"]


class Optimizer(str, enum.Enum):
    ADAM = "adam"
    SGD_MOMENTUM = "sgd_momentum"


@dataclass
class TrainConfig(DataClassDictMixin):
    epochs: int = 25
    optimizer: Optimizer = Optimizer.ADAM
    learning_rate: float = 1e-4
    momentum: float = 0.9
    batch_size: int = 32
    seed: int = 0
    # all manifest classes are trained jointly (average-shape baseline)
    merge_novel: bool = False

    class Config(RecordConfig):
        pass

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise ParameterError("epochs", self.epochs, "must be >= 1")
        if not self.learning_rate > 0:
            raise ParameterError(
                "learning_rate", self.learning_rate, "must be > 0"
            )
        if self.batch_size < 1:
            raise ParameterError("batch_size", self.batch_size, "< 1")
        if not 0.0 <= self.momentum < 1.0:
            raise ParameterError("momentum", self.momentum, "not in [0, 1)")


@dataclass
class AdaptConfig(DataClassDictMixin):
    steps: int = 200
    learning_rate: float = 0.01
    momentum: float = 0.9
    patience: int = 20
    min_delta: float = 0.0
    seed: int = 0

    class Config(RecordConfig):
        pass

    def __post_init__(self) -> None:
        if self.steps < 1:
            raise ParameterError("steps", self.steps, "must be >= 1")
        if not self.learning_rate > 0:
            raise ParameterError(
                "learning_rate", self.learning_rate, "must be > 0"
            )
        if self.patience < 1:
            raise ParameterError("patience", self.patience, "must be >= 1")
        if not 0.0 <= self.momentum < 1.0:
            raise ParameterError("momentum", self.momentum, "not in [0, 1)")
