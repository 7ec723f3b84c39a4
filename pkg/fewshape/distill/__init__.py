from fewshape.distill.distances import (
    DistanceCache,
    DistanceMatrix,
    pairwise_distances,
)
from fewshape.distill.kmedoids import (
    MedoidSet,
    exhaustive_kmedoids,
    kmedoids,
    objective,
)
from fewshape.distill.mini import (
    MiniSize,
    MiniSpec,
    RatioReport,
    distill,
    performance_ratio,
    shapenet_mini_size,
)

__all__ = [
    "DistanceMatrix",
    "DistanceCache",
    "pairwise_distances",
    "MedoidSet",
    "kmedoids",
    "exhaustive_kmedoids",
    "objective",
    "MiniSpec",
    "MiniSize",
    "RatioReport",
    "distill",
    "performance_ratio",
    "shapenet_mini_size",
]
