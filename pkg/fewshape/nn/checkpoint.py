import logging
import os
from pathlib import Path
from typing import Any, Dict, Tuple, Union

import torch
from torch import nn

__all__ = ["save_checkpoint", "load_checkpoint"]

logger = logging.getLogger(__name__)

StateDict = Dict[str, torch.Tensor]


def _archive_state(model: nn.Module) -> StateDict:
    export = getattr(model, "checkpoint_state", None)
    if callable(export):
        return export()
    return model.state_dict()


def save_checkpoint(
    model: nn.Module,
    path: Union[str, Path],
    header: Dict[str, Any],
) -> Path:
    """Write ``{"header": header, "state": tensors}`` atomically.

    Models exposing ``checkpoint_state()`` choose their own archive names;
    otherwise the plain ``state_dict`` is stored.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    state = {k: v.detach().cpu() for k, v in _archive_state(model).items()}
    tmp = path.with_name(path.name + ".tmp")
    torch.save({"header": header, "state": state}, tmp)
    os.replace(tmp, path)
    logger.info("Saved checkpoint %s (%d tensors)", path, len(state))
    return path


def load_checkpoint(
    path: Union[str, Path]
) -> Tuple[Dict[str, Any], StateDict]:
    archive = torch.load(Path(path), map_location="cpu", weights_only=True)
    return archive["header"], archive["state"]
