"""``fewshape`` command line.

Every option can also come from ``FEWSHAPE_<OPTION>`` or from the file
given with ``--config``; a flag on the command line wins over the
environment, which wins over the file.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, TypeVar

import orjson
import yaml

from fewshape import __version__
from fewshape.config import Settings
from fewshape.core.const import DEFAULT_THRESHOLD, RESOLUTION, Split
from fewshape.distill import DistanceCache, MiniSpec, distill
from fewshape.evaluation import (
    AblationKind,
    AblationSpec,
    ReportRow,
    emit_report,
    evaluate,
    export_predictions,
    parse_report,
    relative_gain,
    run_ablation,
)
from fewshape.evaluation.ablation import SHOT_COUNTS
from fewshape.evaluation.alignment import (
    attention_alignment_report,
    class_shapes,
)
from fewshape.evaluation.evaluate import evaluation_classes
from fewshape.exceptions import (
    ConfigurationError,
    FewShapeError,
    exit_code_for,
)
from fewshape.model import ModelConfig, ReconstructionModel
from fewshape.priors import (
    CLI_VARIANTS,
    SHOT_SWEEP,
    ClassRegistry,
    PriorKind,
)
from fewshape.synth import (
    DatasetManifest,
    RenderParams,
    SynthClassSpec,
    build_dataset,
    reference_benchmark,
)
from fewshape.training import (
    AdaptConfig,
    RunDescriptor,
    TrainConfig,
    adapt_novel,
    make_episode,
    onn_expected_score,
    train_base,
)
from fewshape.training.episode import load_shapes

__all__ = ["build_parser", "main"]

logger = logging.getLogger(__name__)

T = TypeVar("T")

CHECKPOINT_NAME = "model.pt"
DESCRIPTOR_NAME = "run.toml"
LOSS_CURVE_NAME = "loss.csv"
FORMATS = ("csv", "markdown")

_CLI_NAMES = {kind: name for name, kind in CLI_VARIANTS.items()}


def _csv_list(value: Any) -> List[str]:
    if isinstance(value, (list, tuple)):
        return [str(v) for v in value]
    return [v.strip() for v in str(value).split(",") if v.strip()]


def _int_list(value: Any) -> List[int]:
    return [int(v) for v in _csv_list(value)]


def _flag(value: Any) -> bool:
    if isinstance(value, bool):
        return value
    if str(value).lower() in ("1", "true", "yes", "on"):
        return True
    if str(value).lower() in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {value!r}")


def _choice(choices: Sequence[str]) -> Callable[[Any], str]:
    def convert(value: Any) -> str:
        if str(value) not in choices:
            raise ValueError(f"{value!r} is not one of {', '.join(choices)}")
        return str(value)

    return convert


class Options:
    """Resolves a parsed namespace against the other setting sources."""

    def __init__(self, args: argparse.Namespace, settings: Settings):
        self.args = args
        self.settings = settings

    def get(
        self,
        name: str,
        default: T,
        convert: Callable[[Any], T] = lambda v: v,  # type: ignore
    ) -> T:
        flag = getattr(self.args, name.replace("-", "_"), None)
        return self.settings.get(name, flag, default, convert)

    def require(self, name: str, convert: Callable[[Any], T] = str) -> T:
        value = self.get(name, None, convert)
        if value is None:
            raise ConfigurationError(f"--{name} is required")
        return value

    def path(self, name: str) -> Path:
        return self.require(name, Path)

    @property
    def progress(self) -> bool:
        return logging.getLogger("fewshape").isEnabledFor(logging.INFO)


def _load_manifest(opts: Options) -> DatasetManifest:
    return DatasetManifest.load(opts.path("manifest"))


def _write_output(opts: Options, data: bytes) -> None:
    out = opts.get("out", None, Path)
    if out is None:
        sys.stdout.write(data.decode())
        return
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(data)
    logger.info("Wrote %s", out)


def _generator_settings(manifest: DatasetManifest) -> Dict[str, Any]:
    return manifest.provenance.get("generator", {})


# gen-data


def _load_specs(path: Path) -> List[SynthClassSpec]:
    if not path.exists():
        raise ConfigurationError(f"Class spec file {path} does not exist")
    data = yaml.safe_load(path.read_text(encoding="utf8"))
    if not isinstance(data, list):
        raise ConfigurationError(f"{path} must contain a list of classes")
    return [SynthClassSpec.from_dict(d) for d in data]


def cmd_gen_data(opts: Options) -> int:
    specs_path = opts.get("specs", None, Path)
    if specs_path is None:
        specs = reference_benchmark()
    else:
        specs = _load_specs(specs_path)
    manifest = build_dataset(
        specs,
        per_class=opts.get("per-class", 40, int),
        views=opts.get("views", 5, int),
        split_ratio=opts.get("split", 0.8, float),
        seed=opts.get("seed", 0, int),
        out_dir=opts.path("out"),
        render_params=RenderParams(image_size=opts.get("image-size", 64, int)),
        resolution=opts.get("resolution", RESOLUTION, int),
        progress=opts.progress,
    )
    logger.info(
        "Generated %d classes, %d entries",
        len(manifest.classes),
        len(manifest.entries),
    )
    return 0


# distill


def cmd_distill(opts: Options) -> int:
    manifest = _load_manifest(opts)
    spec = MiniSpec(
        k=opts.get("k", MiniSpec.k, int),
        v=opts.get("views", MiniSpec.v, int),
        seed=opts.get("seed", 0, int),
    )
    out = opts.path("out")
    if out.parent.resolve() != manifest.root.resolve():
        raise ConfigurationError(
            "The distilled manifest must be written next to its source "
            f"manifest in {manifest.root}"
        )
    cache_dir = opts.get("cache-dir", None, Path)
    mini = distill(
        manifest,
        spec,
        DistanceCache(cache_dir) if cache_dir is not None else None,
        progress=opts.progress,
    )
    mini.dump(out)
    return 0


# train


def _model_config(
    opts: Options, manifest: DatasetManifest, kind: PriorKind
) -> ModelConfig:
    generator = _generator_settings(manifest)
    return ModelConfig(
        variant=kind,
        image_size=opts.get(
            "image-size",
            generator.get("render", {}).get("image_size", 64),
            int,
        ),
        resolution=generator.get("resolution", RESOLUTION),
        embedding_dim=opts.get("embedding-dim", 128, int),
        width_scale=opts.get("width-scale", 1.0, float),
        single_shape_prior=opts.get("single-shape", False, _flag),
        seed=opts.get("seed", 0, int),
    )


def cmd_train(opts: Options) -> int:
    manifest = _load_manifest(opts)
    name = opts.get("variant", "zs", _choice(list(CLI_VARIANTS)))
    merge = name == "as"
    config = TrainConfig(
        epochs=opts.get("epochs", 25, int),
        learning_rate=opts.get("lr", 1e-4, float),
        batch_size=opts.get("batch-size", 32, int),
        seed=opts.get("seed", 0, int),
        merge_novel=merge,
    )
    model_config = _model_config(opts, manifest, CLI_VARIANTS[name])
    registry = ClassRegistry(manifest.base_classes, manifest.novel_classes)
    model = ReconstructionModel(model_config, registry)
    train_set = (
        manifest
        if merge
        else manifest.subset(
            manifest.select(manifest.base_classes, Split.TRAIN)
        )
    )
    model, curve = train_base(model, train_set, config, opts.progress)

    out = opts.path("out")
    checkpoint = model.save(out / CHECKPOINT_NAME, cli_variant=name, shots=0)
    curve.write_csv(out / LOSS_CURVE_NAME)
    RunDescriptor(
        command="train",
        model=model_config,
        manifest=str(opts.path("manifest")),
        seed=config.seed,
        train=config,
        checkpoint=str(checkpoint),
    ).save(out / DESCRIPTOR_NAME)
    logger.info("Saved %s", checkpoint)
    return 0


# adapt


def cmd_adapt(opts: Options) -> int:
    manifest = _load_manifest(opts)
    source = opts.path("checkpoint")
    model, header = ReconstructionModel.load(source)
    shots = opts.get("shots", 25, int)
    classes = opts.get("class", manifest.novel_classes, _csv_list)
    config = AdaptConfig(
        steps=opts.get("steps", 200, int),
        learning_rate=opts.get("lr", 0.01, float),
        patience=opts.get("patience", 20, int),
        seed=opts.get("seed", 0, int),
    )
    episodes = [
        make_episode(manifest, c, shots, config.seed)
        for c in evaluation_classes(manifest, classes)
    ]
    result = adapt_novel(model, manifest, episodes, config)
    out = opts.get(
        "out", source.with_name(f"{source.stem}-{shots}shot.pt"), Path
    )
    model.save(out, cli_variant=header.get("cli_variant"), shots=shots)
    RunDescriptor(
        command="adapt",
        model=model.config,
        manifest=str(opts.path("manifest")),
        seed=config.seed,
        adapt=config,
        checkpoint=str(out),
    ).save(out.with_suffix(".toml"))
    logger.info(
        "Adapted %d classes with %d free parameters, saved %s",
        len(result.class_ids),
        result.free_parameters,
        out,
    )
    return 0


# eval


def _read_rows(path: Path, fmt: str) -> List[ReportRow]:
    if not path.exists():
        raise ConfigurationError(f"Report {path} does not exist")
    return parse_report(path.read_bytes(), fmt)  # type: ignore[arg-type]


def cmd_eval(opts: Options) -> int:
    manifest = _load_manifest(opts)
    model, header = ReconstructionModel.load(opts.path("checkpoint"))
    classes = opts.get("classes", None, _csv_list)
    threshold = opts.get("threshold", DEFAULT_THRESHOLD, float)
    fmt = opts.get("format", "csv", _choice(FORMATS))
    rows = evaluate(
        model,
        manifest,
        classes,
        threshold,
        method=header.get("cli_variant") or model.kind.value,
        shots=int(header.get("shots") or 0),
    )
    zs_report = opts.get("zs-report", None, Path)
    if zs_report is not None:
        summary = relative_gain(rows, _read_rows(zs_report, "csv"))
        rows = summary.rows
        logger.info("Mean relative gain over ZS: %.4f", summary.mean)
    export_dir = opts.get("export-dir", None, Path)
    if export_dir is not None:
        export_predictions(
            model, manifest, export_dir, classes, threshold, opts.progress
        )
    _write_output(opts, emit_report(rows, fmt))  # type: ignore[arg-type]
    return 0


# ablate


def _ablate(opts: Options, kind: AblationKind, **sweep: Any) -> int:
    manifest = _load_manifest(opts)
    checkpoint = opts.get("checkpoint", None, Path)
    if checkpoint is not None:
        model, _ = ReconstructionModel.load(checkpoint)
    elif kind in (AblationKind.PLACEMENT_SWEEP, AblationKind.SHOT_SWEEP):
        # sweeps only need the architecture
        model = ReconstructionModel(
            _model_config(opts, manifest, PriorKind.NONE),
            ClassRegistry(manifest.base_classes, manifest.novel_classes),
        )
    else:
        raise ConfigurationError(f"--checkpoint is required for {kind.value}")
    spec = AblationSpec(
        kind=kind,
        seed=opts.get("seed", 0, int),
        threshold=opts.get("threshold", DEFAULT_THRESHOLD, float),
        classes=opts.get("classes", None, _csv_list),
        train=TrainConfig(
            epochs=opts.get("epochs", 25, int),
            seed=opts.get("seed", 0, int),
        ),
        adapt=AdaptConfig(
            steps=opts.get("steps", 200, int),
            seed=opts.get("seed", 0, int),
        ),
        **sweep,
    )
    report = run_ablation(model, spec, manifest)
    details = opts.get("details", None, Path)
    if details is not None:
        details.parent.mkdir(parents=True, exist_ok=True)
        details.write_bytes(
            orjson.dumps(
                {"kind": report.kind.value, "details": report.details},
                option=orjson.OPT_INDENT_2 | orjson.OPT_SERIALIZE_NUMPY,
            )
        )
    fmt = opts.get("format", "csv", _choice(FORMATS))
    _write_output(opts, emit_report(report.rows, fmt))  # type: ignore
    return 0


def cmd_ablate(opts: Options) -> int:
    kind = AblationKind(
        opts.require("kind", _choice([k.value for k in AblationKind]))
    )
    return _ablate(opts, kind, shots=opts.get("shots", 25, int))


# sweep


def cmd_sweep(opts: Options) -> int:
    names = opts.get(
        "variants", [_CLI_NAMES[k] for k in SHOT_SWEEP], _csv_list
    )
    unknown = [n for n in names if n not in CLI_VARIANTS]
    if unknown:
        raise ConfigurationError(f"Unknown variants: {', '.join(unknown)}")
    return _ablate(
        opts,
        AblationKind.SHOT_SWEEP,
        shot_counts=opts.get("shots", list(SHOT_COUNTS), _int_list),
        variants=[CLI_VARIANTS[n] for n in names],
        draws=opts.get("episodes", 100, int),
    )


# onn


def cmd_onn(opts: Options) -> int:
    manifest = _load_manifest(opts)
    shots = opts.get("shots", 25, int)
    draws = opts.get("episodes", 100, int)
    seed = opts.get("seed", 0, int)
    classes = opts.get("classes", manifest.novel_classes, _csv_list)
    rows = []
    for class_id in evaluation_classes(manifest, classes):
        db = class_shapes(manifest, [class_id])[class_id]
        queries = manifest.select([class_id], Split.TEST)
        score = onn_expected_score(
            load_shapes(manifest, queries),
            db,
            min(shots, len(db)),
            draws,
            seed,
        )
        rows.append(
            ReportRow(class_id, "ONN", shots, score, n_queries=len(queries))
        )
    fmt = opts.get("format", "csv", _choice(FORMATS))
    _write_output(opts, emit_report(rows, fmt))  # type: ignore[arg-type]
    return 0


# align


def cmd_align(opts: Options) -> int:
    manifest = _load_manifest(opts)
    model, _ = ReconstructionModel.load(opts.path("checkpoint"))
    rows = attention_alignment_report(model, manifest)
    _write_output(opts, b"\n".join(r.to_jsonb() for r in rows) + b"\n")
    return 0


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int)
    parser.add_argument("--out", type=Path)


def _manifest(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--manifest", type=Path)


def _report(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--format", choices=FORMATS)
    parser.add_argument("--classes", help="comma-separated class ids")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fewshape",
        description="Few-shot single-view voxel reconstruction.",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    parser.add_argument("--config", type=Path, help="TOML or YAML settings")
    parser.add_argument(
        "--log-level",
        choices=("DEBUG", "INFO", "WARNING", "ERROR"),
        type=str.upper,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="build a synthetic dataset")
    _common(p)
    p.add_argument("--specs", type=Path, help="YAML list of class specs")
    p.add_argument("--per-class", type=int)
    p.add_argument("--views", type=int)
    p.add_argument("--split", type=float)
    p.add_argument("--image-size", type=int)
    p.add_argument("--resolution", type=int)
    p.set_defaults(handler=cmd_gen_data)

    p = sub.add_parser("distill", help="per-class k-medoids distillation")
    _common(p)
    _manifest(p)
    p.add_argument("--k", type=int)
    p.add_argument("--views", type=int)
    p.add_argument("--cache-dir", type=Path)
    p.set_defaults(handler=cmd_distill)

    p = sub.add_parser("train", help="train on the base classes")
    _common(p)
    _manifest(p)
    p.add_argument("--variant", choices=list(CLI_VARIANTS))
    p.add_argument("--epochs", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--width-scale", type=float)
    p.add_argument("--embedding-dim", type=int)
    p.add_argument("--image-size", type=int)
    p.add_argument(
        "--single-shape", action="store_const", const=True, default=None
    )
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser("adapt", help="few-shot adaptation of novel classes")
    _common(p)
    _manifest(p)
    p.add_argument("--checkpoint", type=Path)
    p.add_argument("--shots", type=int)
    p.add_argument("--class", help="comma-separated class ids")
    p.add_argument("--steps", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--patience", type=int)
    p.set_defaults(handler=cmd_adapt)

    p = sub.add_parser("eval", help="per-class IoU report")
    _common(p)
    _manifest(p)
    _report(p)
    p.add_argument("--checkpoint", type=Path)
    p.add_argument("--threshold", type=float)
    p.add_argument("--zs-report", type=Path, help="zero-shot CSV report")
    p.add_argument("--export-dir", type=Path)
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("ablate", help="run an ablation")
    _common(p)
    _manifest(p)
    _report(p)
    p.add_argument("--checkpoint", type=Path)
    p.add_argument("--kind", choices=[k.value for k in AblationKind])
    p.add_argument("--width-scale", type=float)
    p.add_argument("--embedding-dim", type=int)
    p.add_argument("--image-size", type=int)
    p.add_argument("--threshold", type=float)
    p.add_argument("--shots", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--steps", type=int)
    p.add_argument("--details", type=Path, help="JSON file for details")
    p.set_defaults(handler=cmd_ablate)

    p = sub.add_parser("sweep", help="IoU against the number of shots")
    _common(p)
    _manifest(p)
    _report(p)
    p.add_argument("--shots", type=_int_list, help="comma-separated K")
    p.add_argument("--variants", type=_csv_list, help="comma-separated")
    p.add_argument("--episodes", type=int, help="ONN subset draws")
    p.add_argument("--width-scale", type=float)
    p.add_argument("--embedding-dim", type=int)
    p.add_argument("--image-size", type=int)
    p.add_argument("--threshold", type=float)
    p.add_argument("--epochs", type=int)
    p.add_argument("--steps", type=int)
    p.add_argument("--details", type=Path, help="JSON file for details")
    p.set_defaults(handler=cmd_sweep)

    p = sub.add_parser("onn", help="oracle nearest-neighbour baseline")
    _common(p)
    _manifest(p)
    _report(p)
    p.add_argument("--shots", type=int)
    p.add_argument("--episodes", type=int)
    p.set_defaults(handler=cmd_onn)

    p = sub.add_parser("align", help="attention alignment of novel classes")
    _common(p)
    _manifest(p)
    p.add_argument("--checkpoint", type=Path)
    p.set_defaults(handler=cmd_align)
    return parser


def main(
    argv: Optional[Sequence[str]] = None,
    environ: Optional[Dict[str, str]] = None,
) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings = Settings.from_file(args.config, environ)
        opts = Options(args, settings)
        level = opts.get("log-level", "WARNING", str.upper)
        logging.basicConfig(
            level=level,
            format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        )
        return args.handler(opts)
    except FewShapeError as e:
        logger.error("%s", e)
        return exit_code_for(e)
    except OSError as e:
        logger.error("%s", e)
        return 3
