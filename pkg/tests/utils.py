import itertools
from typing import Callable, Sequence

import numpy as np
import torch


def brute_force_simplex_projection(z: np.ndarray) -> np.ndarray:
    """Projection of ``z`` onto the probability simplex by enumerating
    every support set and keeping the one satisfying the KKT conditions."""
    z = np.asarray(z, dtype=np.float64)
    n = z.size
    for size in range(1, n + 1):
        for support in itertools.combinations(range(n), size):
            s = list(support)
            tau = (z[s].sum() - 1.0) / size
            if np.all(z[s] - tau >= 0) and np.all(
                np.delete(z, s) - tau <= 0
            ):
                p = np.zeros(n)
                p[s] = z[s] - tau
                return p
    raise AssertionError("no feasible support set")


def brute_force_iou(a: np.ndarray, b: np.ndarray) -> float:
    inter = union = 0
    for x, y in zip(a.reshape(-1).tolist(), b.reshape(-1).tolist()):
        inter += x and y
        union += x or y
    if union == 0:
        return 1.0
    return inter / union


def directional_errors(
    f: Callable[[], torch.Tensor],
    params: Sequence[torch.Tensor],
    directions: int = 50,
    eps: float = 1e-6,
    seed: int = 0,
) -> np.ndarray:
    """Relative error between autograd and central finite differences of a
    scalar ``f`` along random directions in the space of ``params``.

    ``params`` must be float64 leaves requiring grad; ``f`` is re-evaluated
    after in-place perturbation.
    """
    g = torch.Generator().manual_seed(seed)
    for p in params:
        p.grad = None
    f().backward()
    grads = [p.grad.detach().clone() for p in params]
    errors = []
    for _ in range(directions):
        dirs = [
            torch.randn(p.shape, generator=g, dtype=p.dtype) for p in params
        ]
        norm = torch.sqrt(sum((d**2).sum() for d in dirs))
        dirs = [d / norm for d in dirs]
        analytic = float(sum((gr * d).sum() for gr, d in zip(grads, dirs)))
        with torch.no_grad():
            for p, d in zip(params, dirs):
                p.add_(eps * d)
            plus = float(f())
            for p, d in zip(params, dirs):
                p.sub_(2 * eps * d)
            minus = float(f())
            for p, d in zip(params, dirs):
                p.add_(eps * d)
        numeric = (plus - minus) / (2 * eps)
        scale = max(abs(numeric), abs(analytic), 1e-6)
        errors.append(abs(numeric - analytic) / scale)
    return np.asarray(errors)
