"""Per-class result rows and their CSV / markdown renderings."""
import csv
import io
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

from mashumaro import field_options
from mashumaro.mixins.orjson import DataClassORJSONMixin
from pytablewriter import MarkdownTableWriter
from pytablewriter.typehint import String
from typing_extensions import Literal

from fewshape.config import RecordConfig
from fewshape.exceptions import ConfigurationError, ParameterError

__all__ = ["ReportRow", "COLUMNS", "emit_report", "parse_report"]

COLUMNS = (
    "class",
    "method",
    "shots",
    "mean_iou",
    "relative_gain",
    "n_queries",
)

ReportFormat = Literal["csv", "markdown"]


@dataclass
class ReportRow(DataClassORJSONMixin):
    class_id: str = field(metadata=field_options(alias="class"))
    method: str
    shots: int
    mean_iou: float
    relative_gain: Optional[float] = None
    n_queries: int = 0

    class Config(RecordConfig):
        pass

    def cells(self) -> List[str]:
        return [
            self.class_id,
            self.method,
            str(self.shots),
            _real(self.mean_iou),
            _real(self.relative_gain),
            str(self.n_queries),
        ]

    @classmethod
    def from_cells(cls, cells: Sequence[str]) -> "ReportRow":
        if len(cells) != len(COLUMNS):
            raise ConfigurationError(
                f"Report row has {len(cells)} cells, expected {len(COLUMNS)}"
            )
        try:
            return cls(
                class_id=cells[0],
                method=cells[1],
                shots=int(cells[2]),
                mean_iou=float(cells[3]),
                relative_gain=float(cells[4]) if cells[4] else None,
                n_queries=int(cells[5]),
            )
        except ValueError as e:
            raise ConfigurationError(f"Malformed report row {cells}") from e


def _real(x: Optional[float]) -> str:
    if x is None:
        return ""
    if math.isnan(x):
        return "nan"
    return repr(float(x))


def emit_report(
    rows: Sequence[ReportRow], format: ReportFormat = "csv"
) -> bytes:
    """Render rows with the fixed column order; output is deterministic."""
    if not rows:
        raise ParameterError("rows", [], "nothing to report")
    if format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(COLUMNS)
        writer.writerows(r.cells() for r in rows)
        return buf.getvalue().encode()
    if format == "markdown":
        writer = MarkdownTableWriter(
            headers=list(COLUMNS),
            value_matrix=[r.cells() for r in rows],
            type_hints=[String] * len(COLUMNS),
            margin=1,
        )
        return writer.dumps().strip().encode() + b"\n"
    raise ParameterError("format", format, "expected 'csv' or 'markdown'")


def _markdown_cells(line: str) -> List[str]:
    return [c.strip() for c in line.strip().strip("|").split("|")]


def parse_report(
    data: bytes, format: ReportFormat = "csv"
) -> List[ReportRow]:
    text = data.decode()
    if format == "csv":
        lines = list(csv.reader(io.StringIO(text)))
    elif format == "markdown":
        lines = [
            _markdown_cells(line)
            for line in text.splitlines()
            if line.strip().startswith("|")
        ]
        # drop the alignment row
        lines = [lines[0]] + lines[2:] if len(lines) > 1 else lines
    else:
        raise ParameterError("format", format, "expected 'csv' or 'markdown'")
    if not lines or tuple(lines[0]) != COLUMNS:
        raise ConfigurationError(
            f"Report header does not match the columns {COLUMNS}"
        )
    return [ReportRow.from_cells(cells) for cells in lines[1:] if cells]
