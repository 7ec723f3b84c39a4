import hashlib
from typing import Any, Dict, Iterable

import numpy as np
import orjson
import torch

__all__ = [
    "derive_seed",
    "numpy_rng",
    "torch_generator",
    "content_hash",
    "config_hash",
]


def derive_seed(*parts: Any) -> int:
    """Stable 63-bit seed from an arbitrary tuple of hashable parts."""
    h = hashlib.blake2b(digest_size=8)
    for part in parts:
        h.update(repr(part).encode())
        h.update(b"\x1f")
    return int.from_bytes(h.digest(), "little") & (2**63 - 1)


def numpy_rng(*parts: Any) -> np.random.Generator:
    return np.random.default_rng(derive_seed(*parts))


def torch_generator(*parts: Any) -> torch.Generator:
    g = torch.Generator()
    g.manual_seed(derive_seed(*parts))
    return g


def content_hash(arrays: Iterable[np.ndarray]) -> str:
    h = hashlib.blake2b(digest_size=16)
    for a in arrays:
        a = np.ascontiguousarray(a)
        h.update(str(a.shape).encode())
        h.update(a.tobytes())
    return h.hexdigest()


def config_hash(d: Dict[str, Any]) -> str:
    data = orjson.dumps(d, option=orjson.OPT_SORT_KEYS)
    return hashlib.blake2b(data, digest_size=8).hexdigest()
