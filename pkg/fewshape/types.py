from pathlib import Path
from typing import Any, Iterator, List, Tuple, Union

import numpy as np
from mashumaro.types import SerializableType, SerializationStrategy

from fewshape.exceptions import ParameterError

__all__ = [
    "Interval",
    "PosixPathStrategy",
]


Number = Union[int, float]


class Interval(SerializableType):
    """Closed real interval, serialized as a two-element list."""

    __slots__ = ("low", "high")

    def __init__(self, low: Number, high: Number):
        if not np.isfinite(low) or not np.isfinite(high):
            raise ParameterError("interval", (low, high), "must be finite")
        if low > high:
            raise ParameterError("interval", (low, high), "low > high")
        self.low = float(low)
        self.high = float(high)

    def sample(self, rng: np.random.Generator) -> float:
        if self.low == self.high:
            return self.low
        return float(rng.uniform(self.low, self.high))

    def shifted(self, offset: float) -> "Interval":
        return Interval(self.low + offset, self.high + offset)

    def _serialize(self) -> List[float]:
        return [self.low, self.high]

    @classmethod
    def _deserialize(cls, value: Any) -> "Interval":
        low, high = value
        return cls(low, high)

    def __iter__(self) -> Iterator[float]:
        return iter((self.low, self.high))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Interval):
            return NotImplemented
        return (self.low, self.high) == (other.low, other.high)

    def __hash__(self) -> int:
        return hash((self.low, self.high))

    def __repr__(self) -> str:
        return f"Interval({self.low!r}, {self.high!r})"

    def as_tuple(self) -> Tuple[float, float]:
        return self.low, self.high


class PosixPathStrategy(SerializationStrategy):
    def serialize(self, value: Path) -> str:
        return value.as_posix()

    def deserialize(self, value: str) -> Path:
        return Path(value)
