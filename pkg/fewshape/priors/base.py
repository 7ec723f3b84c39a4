from typing import Dict, Iterable, Optional, Tuple

import torch
from torch import nn

from fewshape.priors.registry import ClassRegistry

__all__ = ["ClassTable"]


class ClassTable(nn.Module):
    """A conditioning store whose class-specific tensors have one row per
    registered class along their first axis.

    Subclasses list the state entries holding class rows in
    ``class_state``; everything else in their state is shared by all
    classes. Only the entries in ``trainable_rows`` are updated by
    novel-class adaptation.
    """

    class_state: Tuple[str, ...] = ()
    trainable_rows: Tuple[str, ...] = ()

    def __init__(self, registry: ClassRegistry, layer_id: str, seed: int):
        super().__init__()
        self.registry = registry
        self.layer_id = layer_id
        self.seed = seed

    def row_tensors(self) -> Dict[str, torch.Tensor]:
        state = dict(self.named_parameters())
        state.update(self.named_buffers())
        return {name: state[name] for name in self.class_state}

    def adaptable_parameters(self) -> Dict[str, nn.Parameter]:
        params = dict(self.named_parameters())
        return {name: params[name] for name in self.trainable_rows}

    def checkpoint_entries(
        self, namespace: str
    ) -> Dict[str, Tuple[str, Optional[int]]]:
        """Archive key -> (local state name, class row or None).

        Class rows are stored as ``<namespace>.<class_id>.<layer_id>.<name>``
        and shared state as ``<namespace>.shared.<layer_id>.<name>``.
        """
        entries: Dict[str, Tuple[str, Optional[int]]] = {}
        for name in self.state_dict():
            if name in self.class_state:
                for i, class_id in enumerate(self.registry.class_ids):
                    key = f"{namespace}.{class_id}.{self.layer_id}.{name}"
                    entries[key] = (name, i)
            else:
                key = f"{namespace}.shared.{self.layer_id}.{name}"
                entries[key] = (name, None)
        return entries

    def reinitialize_class(self, class_id: str, seed: int) -> None:
        raise NotImplementedError

    def reinitialize_classes(self, class_ids: Iterable[str], seed: int):
        for class_id in class_ids:
            self.reinitialize_class(class_id, seed)
