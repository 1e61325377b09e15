"""Result rows and their CSV / JSON serialization."""
from __future__ import annotations

import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional

from ..errors import MimoRelayError

FIXED_COLUMNS = ("metric", "value", "stderr", "method")


class OutputError(MimoRelayError, OSError):
    """Results could not be written."""


@dataclass
class ResultRow:
    experiment: str
    inputs: Dict[str, Any]
    metric: str
    value: float
    stderr: Optional[float] = None
    method: str = ""

    def __post_init__(self):
        self.value = float(self.value)
        if not math.isfinite(self.value):
            raise ValueError(f"metric {self.metric!r} is not finite: {self.value}")
        if self.stderr is not None:
            self.stderr = float(self.stderr)
            if not self.stderr >= 0:
                raise ValueError(f"stderr must be >= 0, got {self.stderr}")


def format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, (int,)) or (hasattr(v, "dtype") and v.dtype.kind in "iu"):
        return str(int(v))
    if isinstance(v, str):
        return v
    return format(float(v), ".17g")


def input_columns(rows: Iterable[ResultRow]) -> List[str]:
    cols: List[str] = []
    for r in rows:
        for k in r.inputs:
            if k not in cols:
                cols.append(k)
    return cols


def to_csv(rows: List[ResultRow]) -> str:
    cols = input_columns(rows)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["experiment", *cols, *FIXED_COLUMNS])
    for r in rows:
        writer.writerow([r.experiment, *(format_value(r.inputs.get(c)) for c in cols),
                         r.metric, format_value(r.value), format_value(r.stderr), r.method])
    return buf.getvalue()


def _plain(v):
    if hasattr(v, "item"):
        return v.item()
    return v


def to_json(rows: List[ResultRow], metadata: Dict[str, Any]) -> str:
    records = []
    for r in rows:
        rec = {"experiment": r.experiment}
        rec.update({k: _plain(v) for k, v in r.inputs.items()})
        rec.update(metric=r.metric, value=r.value, stderr=r.stderr, method=r.method)
        records.append(rec)
    return json.dumps({"metadata": metadata, "rows": records}, indent=1) + "\n"


def emit(rows: List[ResultRow], format: str, path: Optional[str], metadata: Optional[Dict[str, Any]] = None):
    """Write rows as CSV or JSON to ``path`` (stdout when None or '-')."""
    if format == "csv":
        text = to_csv(rows)
    elif format == "json":
        text = to_json(rows, metadata or {})
    else:
        raise ValueError(f"format must be 'csv' or 'json', got {format!r}")
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc
