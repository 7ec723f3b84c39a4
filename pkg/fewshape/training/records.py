"""Loss curves (CSV) and run descriptors (TOML) stored next to checkpoints."""
import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Union

from mashumaro import DataClassDictMixin
from mashumaro.mixins.toml import DataClassTOMLMixin

from fewshape import __version__
from fewshape.config import RecordConfig
from fewshape.core.const import Split
from fewshape.core.helpers import config_hash
from fewshape.exceptions import ConfigurationError
from fewshape.model import ModelConfig
from fewshape.training.config import AdaptConfig, TrainConfig

__all__ = ["LossRecord", "LossCurve", "RunDescriptor"]

logger = logging.getLogger(__name__)

CSV_FIELDS = ("epoch", "split", "loss", "mean_iou")


@dataclass
class LossRecord(DataClassDictMixin):
    epoch: int
    split: Split
    loss: float
    mean_iou: float


@dataclass
class LossCurve:
    records: List[LossRecord] = field(default_factory=list)

    def append(
        self, epoch: int, split: Split, loss: float, mean_iou: float
    ) -> LossRecord:
        record = LossRecord(epoch, split, loss, mean_iou)
        self.records.append(record)
        return record

    def __iter__(self) -> Iterator[LossRecord]:
        return iter(self.records)

    def __len__(self) -> int:
        return len(self.records)

    def losses(self, split: Split = Split.TRAIN) -> List[float]:
        return [r.loss for r in self.records if r.split == split]

    def write_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="", encoding="utf8") as f:
            writer = csv.DictWriter(f, fieldnames=CSV_FIELDS)
            writer.writeheader()
            for r in self.records:
                writer.writerow(r.to_dict())
        return path

    @classmethod
    def read_csv(cls, path: Union[str, Path]) -> "LossCurve":
        with Path(path).open(newline="", encoding="utf8") as f:
            rows = list(csv.DictReader(f))
        try:
            return cls(
                [
                    LossRecord(
                        int(row["epoch"]),
                        Split(row["split"]),
                        float(row["loss"]),
                        float(row["mean_iou"]),
                    )
                    for row in rows
                ]
            )
        except (KeyError, ValueError) as e:
            raise ConfigurationError(f"Malformed loss curve {path}") from e


@dataclass
class RunDescriptor(DataClassTOMLMixin):
    command: str
    model: ModelConfig
    manifest: str
    seed: int
    train: Optional[TrainConfig] = None
    adapt: Optional[AdaptConfig] = None
    checkpoint: Optional[str] = None
    version: str = __version__
    config_hash: str = ""

    class Config(RecordConfig):
        pass

    def __post_init__(self) -> None:
        if not self.config_hash:
            self.config_hash = config_hash(self._hashed())

    def _hashed(self) -> Dict[str, Any]:
        d = self.to_dict()
        for key in ("checkpoint", "version", "config_hash"):
            d.pop(key, None)
        return d

    @property
    def variant(self) -> str:
        return self.model.variant.value

    def save(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_toml(), encoding="utf8")
        logger.debug("Wrote run descriptor %s", path)
        return path

    @classmethod
    def load(cls, path: Union[str, Path]) -> "RunDescriptor":
        path = Path(path)
        if not path.exists():
            raise ConfigurationError(f"Run descriptor {path} does not exist")
        return cls.from_toml(path.read_text(encoding="utf8"))
