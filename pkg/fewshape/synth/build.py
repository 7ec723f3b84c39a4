import logging
from dataclasses import replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

from tqdm import tqdm

from fewshape.core.const import RESOLUTION, Role, Split
from fewshape.core.helpers import derive_seed, numpy_rng
from fewshape.exceptions import ConfigurationError, ParameterError
from fewshape.synth.families import Family, SynthClassSpec, generate_class
from fewshape.synth.manifest import (
    DatasetManifest,
    ManifestEntry,
    ManifestHeader,
)
from fewshape.synth.render import RenderParams, render_views, save_image
from fewshape.types import Interval
from fewshape.voxels.binvox import save_binvox

__all__ = [
    "build_dataset",
    "split_indices",
    "reference_benchmark",
    "morph_specs",
    "MANIFEST_NAME",
]

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.jsonl"


def split_indices(
    n: int, split_ratio: float, seed: int, class_id: str
) -> List[Split]:
    """Per-shape train/test assignment for one class."""
    n_train = int(round(split_ratio * n))
    if n > 1:
        n_train = min(max(n_train, 1), n - 1)
    order = numpy_rng(seed, class_id, "split").permutation(n)
    splits = [Split.TEST] * n
    for i in order[:n_train]:
        splits[int(i)] = Split.TRAIN
    return splits


def build_dataset(
    specs: Sequence[SynthClassSpec],
    per_class: int,
    views: int,
    split_ratio: float,
    seed: int,
    out_dir: Union[str, Path],
    render_params: Optional[RenderParams] = None,
    resolution: int = RESOLUTION,
    progress: bool = False,
) -> DatasetManifest:
    if not 0.0 < split_ratio < 1.0:
        raise ParameterError("split_ratio", split_ratio, "must be in (0, 1)")
    if views < 1:
        raise ParameterError("views", views, "must be >= 1")
    ids = [s.class_id for s in specs]
    duplicates = sorted({c for c in ids if ids.count(c) > 1})
    if duplicates:
        raise ConfigurationError(f"Duplicate class ids: {duplicates}")
    if render_params is None:
        render_params = RenderParams()
    out_dir = Path(out_dir)

    entries: List[ManifestEntry] = []
    for spec in tqdm(specs, disable=not progress, desc="classes"):
        shapes = generate_class(spec, per_class, seed, resolution)
        splits = split_indices(per_class, split_ratio, seed, spec.class_id)
        for i, grid in enumerate(shapes):
            shape_rel = f"shapes/{spec.class_id}/{i:04d}.binvox"
            save_binvox(grid, out_dir / shape_rel)
            item_seed = derive_seed(seed, spec.class_id, i)
            images = render_views(grid, render_params, views, item_seed)
            for v, image in enumerate(images):
                image_rel = f"images/{spec.class_id}/{i:04d}_{v:02d}.png"
                save_image(image, out_dir / image_rel)
                entries.append(
                    ManifestEntry(
                        image=image_rel,
                        shape=shape_rel,
                        class_id=spec.class_id,
                        view=v,
                        split=splits[i],
                    )
                )
        logger.info(
            "generated class %s: %d shapes x %d views",
            spec.class_id,
            per_class,
            views,
        )

    header = ManifestHeader(
        seed=seed,
        splits={s.class_id: s.role for s in specs},
        provenance={
            "generator": {
                "specs": [s.to_dict() for s in specs],
                "per_class": per_class,
                "views": views,
                "split_ratio": split_ratio,
                "resolution": resolution,
                "render": render_params.to_dict(),
            }
        },
    )
    manifest = DatasetManifest(header, entries, out_dir)
    manifest.dump(out_dir / MANIFEST_NAME)
    return manifest


def _spec(
    class_id: str,
    family: Family,
    role: Role,
    **ranges: Sequence[float],
) -> SynthClassSpec:
    return SynthClassSpec(
        class_id=class_id,
        family=family,
        param_ranges={k: Interval(*v) for k, v in ranges.items()},
        role=role,
    )


def reference_benchmark() -> List[SynthClassSpec]:
    """Four base and four novel classes for R=32.

    ``bench`` and ``tower`` are parametric relatives of the ``table`` and
    ``stack`` base classes; ``plane`` and ``donut`` share no family with
    any base class.
    """
    base, novel = Role.BASE, Role.NOVEL
    return [
        _spec(
            "stack",
            Family.BOX_STACK,
            base,
            levels=(2, 4),
            width=(6, 16),
            height=(3, 6),
        ),
        _spec(
            "table",
            Family.TABLE_LIKE,
            base,
            top_width=(16, 24),
            top_depth=(12, 20),
            top_thickness=(2, 3),
            leg_height=(8, 14),
            leg_thickness=(2, 3),
        ),
        _spec("can", Family.CYLINDER, base, radius=(5, 10), height=(10, 24)),
        _spec(
            "bracket",
            Family.L_BRACKET,
            base,
            arm_length=(14, 24),
            arm_thickness=(3, 6),
            depth=(6, 14),
        ),
        _spec(
            "bench",
            Family.TABLE_LIKE,
            novel,
            top_width=(22, 28),
            top_depth=(6, 10),
            top_thickness=(2, 3),
            leg_height=(5, 9),
            leg_thickness=(2, 3),
        ),
        _spec(
            "tower",
            Family.BOX_STACK,
            novel,
            levels=(4, 6),
            width=(4, 10),
            height=(3, 4),
        ),
        _spec(
            "plane",
            Family.WING_BODY,
            novel,
            body_length=(18, 26),
            body_radius=(2, 4),
            wing_span=(16, 26),
            wing_chord=(4, 8),
            wing_thickness=(1, 2),
        ),
        _spec(
            "donut",
            Family.RING,
            novel,
            outer_radius=(8, 13),
            thickness=(2, 4),
            height=(3, 8),
        ),
    ]


def morph_specs(
    spec: SynthClassSpec,
    offsets: Dict[str, float],
    levels: int,
    role: Role = Role.NOVEL,
) -> List[SynthClassSpec]:
    """Specs whose named ranges move away from ``spec`` level by level.

    Level 0 is ``spec`` itself (under a new class id); level ``k`` shifts
    every range in ``offsets`` by ``k`` times its offset.
    """
    if levels < 1:
        raise ParameterError("levels", levels, "must be >= 1")
    unknown = sorted(set(offsets) - set(spec.param_ranges))
    if unknown:
        raise ParameterError("offsets", unknown, "unknown parameters")
    out = []
    for k in range(levels):
        ranges = dict(spec.param_ranges)
        for name, step in offsets.items():
            ranges[name] = ranges[name].shifted(k * step)
        out.append(
            replace(
                spec,
                class_id=f"{spec.class_id}~{k}",
                param_ranges=ranges,
                role=role,
            )
        )
    return out
