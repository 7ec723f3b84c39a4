"""Oracle nearest-neighbour baseline."""
from typing import Optional, Sequence, Tuple

import numpy as np

from fewshape.core.helpers import numpy_rng
from fewshape.exceptions import ParameterError
from fewshape.voxels.grid import VoxelGrid
from fewshape.voxels.metrics import iou_many

__all__ = ["onn_retrieve", "onn_subset", "onn_expected_score"]


def onn_subset(
    n: int, k: Optional[int], seed: int, draw: int = 0
) -> np.ndarray:
    """Sorted indices of a seeded uniform K-subset of ``range(n)``.

    Subsets of one draw are nested: the K-subset is a prefix of the same
    permutation for every K.
    """
    if n == 0:
        raise ParameterError("db", [], "shape database is empty")
    if k is None or k == n:
        return np.arange(n)
    if not 1 <= k <= n:
        raise ParameterError("k", k, f"must lie in [1, {n}]")
    perm = numpy_rng(seed, "onn", draw).permutation(n)
    return np.sort(perm[:k])


def onn_retrieve(
    query: VoxelGrid,
    db: Sequence[VoxelGrid],
    k: Optional[int] = None,
    seed: int = 0,
    draw: int = 0,
) -> Tuple[VoxelGrid, float]:
    """Best-IoU database entry for ``query``; ``k=None`` searches all of
    ``db``. Ties go to the lowest database index."""
    subset = onn_subset(len(db), k, seed, draw)
    scores = iou_many(query, [db[i] for i in subset])
    best = int(np.argmax(scores))
    return db[int(subset[best])], float(scores[best])


def onn_expected_score(
    queries: Sequence[VoxelGrid],
    db: Sequence[VoxelGrid],
    k: Optional[int],
    draws: int = 100,
    seed: int = 0,
) -> float:
    """Mean ONN-K score over ``draws`` seeded subsets and all queries."""
    if not queries:
        raise ParameterError("queries", [], "at least one query is required")
    if draws < 1:
        raise ParameterError("draws", draws, "must be >= 1")
    if k is None or k == len(db):
        draws = 1
    total = 0.0
    for d in range(draws):
        for q in queries:
            total += onn_retrieve(q, db, k, seed, d)[1]
    return total / (draws * len(queries))
