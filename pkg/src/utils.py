import argparse
import csv
import io
import logging
import sys
from pathlib import Path
from typing import Any, Dict, Iterable, List, Literal, Optional, Sequence

from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, ValidationError, model_validator

from src.exceptions import ArtifactWriteError, UsageError

logger = logging.getLogger(__name__)

CommandName = Literal["certify", "sweep", "coeffs", "oscillation", "frame", "selfcheck"]
OutputFormat = Literal["json", "csv", "text"]

_OUTPUT_FIELDS = {"output_format", "output_path"}
# (required, optional) flags per command, by RunConfig field name
COMMAND_FIELDS: Dict[str, tuple[set, set]] = {
    "certify": ({"lam"}, {"n_override", "gap", "with_oscillation"}),
    "sweep": ({"lambda_range"}, {"n_override", "gap"}),
    "coeffs": ({"n_override"}, set()),
    "oscillation": ({"lam"}, {"n_override", "gap"}),
    "frame": ({"lam"}, set()),
    "selfcheck": (set(), set()),
}
DEFAULT_FORMATS: Dict[str, str] = {
    "certify": "json",
    "sweep": "csv",
    "coeffs": "csv",
    "oscillation": "json",
    "frame": "json",
    "selfcheck": "text",
}
CSV_COMMANDS = {"sweep", "coeffs", "selfcheck"}
_FLAG_NAMES = {
    "lam": "--lambda",
    "lambda_range": "--lambda-min/--lambda-max/--steps",
    "n_override": "--n",
    "gap": "--gap",
    "with_oscillation": "--with-oscillation",
}


class RunConfig(BaseModel):
    """Validated command line: exactly the flags the chosen command needs."""
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    command: CommandName
    lam: Optional[float] = Field(default=None, alias="lambda", gt=0, allow_inf_nan=False)
    lambda_range: Optional[tuple[float, float, int]] = None
    n_override: Optional[int] = Field(default=None, ge=1)
    gap: float = Field(default=1e-6, gt=0, allow_inf_nan=False)
    output_format: Optional[OutputFormat] = None
    output_path: Optional[Path] = None
    with_oscillation: bool = False

    @model_validator(mode="after")
    def _exact_fields(self) -> "RunConfig":
        required, optional = COMMAND_FIELDS[self.command]
        present = self.model_fields_set - {"command"} - _OUTPUT_FIELDS
        missing = required - present
        if missing:
            raise ValueError(f"{self.command} requires {', '.join(_FLAG_NAMES[f] for f in sorted(missing))}")
        extra = present - required - optional
        if extra:
            raise ValueError(f"{self.command} does not accept {', '.join(_FLAG_NAMES[f] for f in sorted(extra))}")
        if self.lambda_range is not None:
            lo, hi, steps = self.lambda_range
            if not 0 < lo <= hi or steps < 1:
                raise ValueError("need 0 < --lambda-min <= --lambda-max and --steps >= 1")
        if self.output_format == "csv" and self.command not in CSV_COMMANDS:
            raise ValueError(f"{self.command} has no CSV form")
        return self

    @property
    def resolved_format(self) -> str:
        return self.output_format or DEFAULT_FORMATS[self.command]


def parse_run_config(namespace: argparse.Namespace) -> RunConfig:
    """
    Builds a RunConfig from parsed flags, keeping only the flags actually given.

    Raises:
        UsageError: If the flags do not fit the command.
    """
    given = {k: v for k, v in vars(namespace).items() if v is not None}
    range_parts = [given.pop(k, None) for k in ("lambda_min", "lambda_max", "steps")]
    if any(part is not None for part in range_parts):
        if any(part is None for part in range_parts):
            raise UsageError("--lambda-min, --lambda-max and --steps go together")
        given["lambda_range"] = tuple(range_parts)
    try:
        return RunConfig.model_validate(given)
    except ValidationError as e:
        messages = "; ".join(err["msg"] for err in e.errors())
        raise UsageError(messages) from e


def format_number(value: Any) -> str:
    """Locale-independent cell: %.17g for floats, lowercase booleans, empty for None."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return "%.17g" % value
    return str(value)


def to_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_number(v) for v in row])
    return buffer.getvalue()


def to_json(payload: BaseModel | List[BaseModel]) -> str:
    """Deterministic JSON with aliased field names (e.g. "lambda")."""
    if isinstance(payload, BaseModel):
        return payload.model_dump_json(by_alias=True, indent=2) + "\n"
    if not payload:
        return "[]\n"
    adapter = TypeAdapter(List[type(payload[0])])
    return adapter.dump_json(payload, by_alias=True, indent=2).decode("utf-8") + "\n"


def _flatten(prefix: str, value: Any, out: List[tuple[str, str]]) -> None:
    if isinstance(value, dict):
        for key, inner in value.items():
            _flatten(f"{prefix}.{key}" if prefix else key, inner, out)
    else:
        out.append((prefix, format_number(value)))


def to_text(payload: BaseModel | List[BaseModel]) -> str:
    """Aligned 'key  value' lines for a record, an aligned table for a list of records."""
    if isinstance(payload, BaseModel):
        lines: List[tuple[str, str]] = []
        _flatten("", payload.model_dump(by_alias=True), lines)
        width = max((len(k) for k, _ in lines), default=0)
        return "".join(f"{k.ljust(width)}  {v}\n" for k, v in lines)
    if not payload:
        return ""
    records = [payload_row.model_dump(by_alias=True) for payload_row in payload]
    header = list(records[0].keys())
    cells = [[format_number(r[h]) for h in header] for r in records]
    widths = [max(len(h), *(len(row[i]) for row in cells)) for i, h in enumerate(header)]

    def line(row: List[str]) -> str:
        return "  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() + "\n"

    return line(header) + "".join(line(row) for row in cells)


def emit(artifact: str, output_path: Optional[Path]) -> None:
    """
    Writes the artifact to output_path, or to stdout when no path is given.

    Raises:
        ArtifactWriteError: If the file cannot be written.
    """
    if output_path is None:
        sys.stdout.write(artifact)
        sys.stdout.flush()
        return
    try:
        output_path.write_text(artifact, encoding="utf-8")
    except OSError as e:
        logger.error(f"Failed to write {output_path}: {e}", exc_info=True)
        raise ArtifactWriteError(f"cannot write {output_path}: {e}") from e
    logger.info(f"Wrote {len(artifact)} characters to {output_path}")


def render(payload: BaseModel | List[BaseModel], output_format: str, csv_header=None, csv_rows=None) -> str:
    if output_format == "json":
        return to_json(payload)
    if output_format == "csv":
        return to_csv(csv_header, csv_rows)
    return to_text(payload)
