from fewshape.evaluation.ablation import (
    AblationKind,
    AblationReport,
    AblationSpec,
    run_ablation,
)
from fewshape.evaluation.alignment import (
    AlignmentRow,
    attention_alignment_report,
    class_shapes,
)
from fewshape.evaluation.evaluate import (
    GainSummary,
    evaluate,
    query_ious,
    relative_gain,
)
from fewshape.evaluation.export import ExportedPair, export_predictions
from fewshape.evaluation.report import (
    COLUMNS,
    ReportRow,
    emit_report,
    parse_report,
)

__all__ = [
    "ReportRow",
    "COLUMNS",
    "emit_report",
    "parse_report",
    "evaluate",
    "query_ious",
    "relative_gain",
    "GainSummary",
    "AblationKind",
    "AblationSpec",
    "AblationReport",
    "run_ablation",
    "ExportedPair",
    "export_predictions",
    "AlignmentRow",
    "attention_alignment_report",
    "class_shapes",
]
