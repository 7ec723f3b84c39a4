import itertools
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from fewshape.core.helpers import numpy_rng
from fewshape.distill.distances import DistanceMatrix
from fewshape.exceptions import NumericError, ParameterError

__all__ = ["MedoidSet", "kmedoids", "exhaustive_kmedoids", "objective"]

logger = logging.getLogger(__name__)


def _assign(d: np.ndarray, medoids: np.ndarray) -> np.ndarray:
    """Nearest medoid position per point; medoids own themselves."""
    labels = np.argmin(d[:, medoids], axis=1)
    labels[medoids] = np.arange(len(medoids))
    return labels


def objective(dist: DistanceMatrix, assignment: np.ndarray) -> float:
    """Sum of point-to-assigned-medoid distances."""
    d = dist.values
    return float(d[np.arange(dist.n), assignment].sum())


@dataclass
class MedoidSet:
    indices: List[int]
    assignment: List[int]
    objective: float
    history: List[float] = field(default_factory=list)

    @property
    def k(self) -> int:
        return len(self.indices)

    def members(self, medoid: int) -> List[int]:
        return [i for i, m in enumerate(self.assignment) if m == medoid]

    def recompute_objective(self, dist: DistanceMatrix) -> float:
        return objective(dist, np.asarray(self.assignment))


def _check_k(n: int, k: int) -> None:
    if not 1 <= k <= n:
        raise ParameterError("k", k, f"must lie in [1, {n}]")


def _seed_medoids(d: np.ndarray, k: int, seed: int) -> np.ndarray:
    """k-medoids++ seeding: draws proportional to squared distance."""
    n = d.shape[0]
    rng = numpy_rng(seed, "kmedoids")
    chosen = [int(rng.integers(n))]
    nearest = d[chosen[0]].copy()
    while len(chosen) < k:
        weights = nearest**2
        weights[chosen] = 0.0
        total = weights.sum()
        if total > 0:
            nxt = int(rng.choice(n, p=weights / total))
        else:
            # remaining points duplicate chosen medoids
            nxt = next(i for i in range(n) if i not in chosen)
        chosen.append(nxt)
        nearest = np.minimum(nearest, d[nxt])
    return np.sort(np.asarray(chosen))


def kmedoids(
    dist: DistanceMatrix,
    k: int,
    seed: int = 0,
    max_iter: int = 300,
    init: Optional[List[int]] = None,
) -> MedoidSet:
    """Voronoi-iteration k-medoids.

    Alternates nearest-medoid assignment with a per-cluster medoid update
    until the medoid set is a fixed point. A medoid is only replaced by a
    strictly better member, so the objective never increases.
    """
    n = dist.n
    _check_k(n, k)
    d = dist.values
    if init is None:
        medoids = _seed_medoids(d, k, seed)
    else:
        medoids = np.sort(np.asarray(init, dtype=np.intp))
        if len(set(medoids.tolist())) != k:
            raise ParameterError("init", init, f"needs {k} distinct indices")
    labels = _assign(d, medoids)
    history = [objective(dist, medoids[labels])]
    for _ in range(max_iter):
        updated = medoids.copy()
        for c, m in enumerate(medoids):
            members = np.flatnonzero(labels == c)
            costs = d[np.ix_(members, members)].sum(axis=1)
            best = int(np.argmin(costs))
            current = int(np.flatnonzero(members == m)[0])
            if costs[best] < costs[current]:
                updated[c] = members[best]
        if np.array_equal(np.sort(updated), medoids):
            break
        medoids = np.sort(updated)
        labels = _assign(d, medoids)
        value = objective(dist, medoids[labels])
        if value > history[-1]:
            raise NumericError(
                "k-medoids objective increased", (len(history), value)
            )
        history.append(value)
    else:
        logger.warning("k-medoids stopped after %d iterations", max_iter)
    assignment = medoids[labels]
    return MedoidSet(
        indices=medoids.tolist(),
        assignment=assignment.tolist(),
        objective=history[-1],
        history=history,
    )


def exhaustive_kmedoids(dist: DistanceMatrix, k: int) -> MedoidSet:
    """Globally optimal medoids by enumeration; for small instances."""
    _check_k(dist.n, k)
    d = dist.values

    def candidate(combo: Tuple[int, ...]) -> MedoidSet:
        medoids = np.asarray(combo)
        assignment = medoids[_assign(d, medoids)]
        value = objective(dist, assignment)
        return MedoidSet(list(combo), assignment.tolist(), value, [value])

    # min keeps the first of equally good combinations
    return min(
        map(candidate, itertools.combinations(range(dist.n), k)),
        key=lambda s: s.objective,
    )
