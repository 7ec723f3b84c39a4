from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Sequence, Union

import torch
from mashumaro import DataClassDictMixin

from fewshape.core.const import Role
from fewshape.exceptions import ClassLookupError, ConfigurationError

__all__ = ["ClassRegistry"]


@dataclass
class ClassRegistry(DataClassDictMixin):
    """Ordered class ids; row ``i`` of every per-class table is class i."""

    base: List[str]
    novel: List[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        ids = self.class_ids
        if len(set(ids)) != len(ids):
            raise ConfigurationError(f"Duplicate class ids in {ids}")
        self._index: Dict[str, int] = {c: i for i, c in enumerate(ids)}

    @property
    def class_ids(self) -> List[str]:
        return list(self.base) + list(self.novel)

    def __len__(self) -> int:
        return len(self.base) + len(self.novel)

    def __contains__(self, class_id: object) -> bool:
        return class_id in self._index

    def role(self, class_id: str) -> Role:
        self.index(class_id)
        return Role.BASE if class_id in self.base else Role.NOVEL

    def index(self, class_id: str) -> int:
        try:
            return self._index[class_id]
        except KeyError:
            raise ClassLookupError([class_id]) from None

    def indices(
        self, class_ids: Union[str, Sequence[str]]
    ) -> torch.Tensor:
        if isinstance(class_ids, str):
            class_ids = [class_ids]
        unknown = [c for c in class_ids if c not in self._index]
        if unknown:
            raise ClassLookupError(unknown)
        return torch.tensor(
            [self._index[c] for c in class_ids], dtype=torch.long
        )

    def base_indices(self) -> torch.Tensor:
        return torch.arange(len(self.base), dtype=torch.long)

    def ids_for(self, indices: Iterable[int]) -> List[str]:
        ids = self.class_ids
        return [ids[int(i)] for i in indices]
