from fewshape.synth.build import (
    build_dataset,
    morph_specs,
    reference_benchmark,
)
from fewshape.synth.dataset import ShapeImageDataset
from fewshape.synth.families import Family, SynthClassSpec, generate_class
from fewshape.synth.manifest import (
    DatasetManifest,
    ManifestEntry,
    ManifestHeader,
)
from fewshape.synth.render import RenderParams, render_views

__all__ = [
    "Family",
    "SynthClassSpec",
    "RenderParams",
    "DatasetManifest",
    "ManifestEntry",
    "ManifestHeader",
    "ShapeImageDataset",
    "generate_class",
    "render_views",
    "build_dataset",
    "reference_benchmark",
    "morph_specs",
]
