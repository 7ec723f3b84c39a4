"""Sparsemax: Euclidean projection onto the probability simplex."""
from typing import Any, Tuple

import torch
from torch.autograd import Function

from fewshape.exceptions import ParameterError

__all__ = ["Sparsemax", "sparsemax", "sparsemax_jvp", "sparsemax_threshold"]


def _check(z: torch.Tensor, dim: int) -> None:
    if z.dim() == 0 or z.size(dim) == 0:
        raise ParameterError("z", tuple(z.shape), "must be nonempty")
    if not torch.isfinite(z).all():
        raise ParameterError("z", "non-finite", "entries must be finite")


def sparsemax_threshold(
    z: torch.Tensor, dim: int = -1
) -> Tuple[torch.Tensor, torch.Tensor]:
    """Threshold tau and support size k(z) along ``dim``."""
    zs, _ = torch.sort(z, dim=dim, descending=True, stable=True)
    n = z.size(dim)
    shape = [1] * z.dim()
    shape[dim] = n
    rho = torch.arange(1, n + 1, dtype=z.dtype, device=z.device).view(shape)
    cumsum = zs.cumsum(dim)
    support = (1 + rho * zs) > cumsum
    k = support.sum(dim=dim, keepdim=True)
    tau = (cumsum.gather(dim, k - 1) - 1) / k.to(z.dtype)
    return tau, k


class Sparsemax(Function):
    @staticmethod
    def forward(ctx: Any, z: torch.Tensor, dim: int = -1) -> torch.Tensor:
        z = z - z.max(dim=dim, keepdim=True).values
        tau, _ = sparsemax_threshold(z, dim)
        out = torch.clamp(z - tau, min=0)
        ctx.dim = dim
        ctx.save_for_backward(out)
        return out

    @staticmethod
    def backward(ctx: Any, grad_output: torch.Tensor) -> Any:
        (out,) = ctx.saved_tensors
        return _project_on_support(out, grad_output, ctx.dim), None


def _project_on_support(
    p: torch.Tensor, g: torch.Tensor, dim: int
) -> torch.Tensor:
    # J = I_K - 1_K 1_K^T / |K| on the support K, zero elsewhere
    support = (p > 0).to(g.dtype)
    size = support.sum(dim=dim, keepdim=True)
    mean = (g * support).sum(dim=dim, keepdim=True) / size
    return support * (g - mean)


def sparsemax(z: torch.Tensor, dim: int = -1) -> torch.Tensor:
    z = torch.as_tensor(z)
    _check(z, dim)
    return Sparsemax.apply(z, dim)


def sparsemax_jvp(
    z: torch.Tensor, upstream: torch.Tensor, dim: int = -1
) -> torch.Tensor:
    """Jacobian of sparsemax at ``z`` applied to ``upstream``.

    The Jacobian is symmetric, so this is also the vector-Jacobian product
    used by the backward pass.
    """
    z = torch.as_tensor(z)
    _check(z, dim)
    upstream = torch.as_tensor(upstream, dtype=z.dtype)
    with torch.no_grad():
        p = Sparsemax.apply(z.detach(), dim)
    return _project_on_support(p, upstream, dim)
