"""JSON reports and CSV tables."""

from __future__ import annotations

import csv
import io
import json
import math
import os
from collections.abc import Iterable, Mapping, Sequence
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

import numpy as np

from ultralab.exceptions import ConfigError
from ultralab.utils.logging import get_logger

__all__ = [
    "SCHEMA_VERSION",
    "build_report",
    "jsonable",
    "dumps",
    "write_json",
    "write_csv",
    "csv_text",
    "load_report",
    "merge_reports",
]

logger = get_logger(__name__)

SCHEMA_VERSION = 1

#: non-finite floats are written as these strings
NONFINITE = {math.inf: "inf", -math.inf: "-inf"}


def _now() -> str:
    return datetime.now(timezone.utc).replace(microsecond=0).isoformat()


def jsonable(obj: Any) -> Any:
    """Plain JSON data from reports, numpy values and dataclasses with ``as_dict``."""
    if hasattr(obj, "as_dict"):
        return jsonable(obj.as_dict())
    if isinstance(obj, Mapping):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        if math.isnan(value):
            return "nan"
        return NONFINITE.get(value, value)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": jsonable(obj.real), "im": jsonable(obj.imag)}
    return obj


def build_report(
    command: str,
    result: Any,
    *,
    config: Any = None,
    status: str = "ok",
    generated_at: str | None = None,
) -> dict[str, Any]:
    return {
        "schema_version": SCHEMA_VERSION,
        "generated_at": generated_at or _now(),
        "command": command,
        "status": status,
        "config": jsonable(config) if config is not None else None,
        "result": jsonable(result),
    }


def dumps(report: Mapping[str, Any]) -> str:
    return json.dumps(jsonable(report), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_json(path: str | os.PathLike, report: Mapping[str, Any]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(report), encoding="utf-8")
    logger.info("report written", extra={"path": str(path)})
    return path


def _rows(rows: Iterable[Mapping[str, Any]]) -> tuple[list[str], list[dict[str, Any]]]:
    rows = [dict(jsonable(r)) for r in rows]
    columns: list[str] = []
    for row in rows:
        columns.extend(c for c in row if c not in columns)
    return columns, rows


def csv_text(rows: Iterable[Mapping[str, Any]], columns: Sequence[str] | None = None) -> str:
    found, rows = _rows(rows)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(columns or found), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({c: row.get(c, "") for c in writer.fieldnames})
    return buf.getvalue()


def write_csv(
    path: str | os.PathLike,
    rows: Iterable[Mapping[str, Any]],
    columns: Sequence[str] | None = None,
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(csv_text(rows, columns), encoding="utf-8")
    logger.info("table written", extra={"path": str(path)})
    return path


def load_report(path: str | os.PathLike) -> dict[str, Any]:
    try:
        report = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read report {str(path)!r}: {exc}") from exc
    if not isinstance(report, dict) or "schema_version" not in report:
        raise ConfigError(f"{str(path)!r} is not a report")
    if report["schema_version"] != SCHEMA_VERSION:
        raise ConfigError(
            f"{str(path)!r} has schema version {report['schema_version']}, expected {SCHEMA_VERSION}"
        )
    return report


def merge_reports(
    reports: Sequence[Mapping[str, Any]], *, generated_at: str | None = None
) -> dict[str, Any]:
    """Combine reports into one document; the worst status wins."""
    order = ("ok", "violation", "failure")
    statuses = [r.get("status", "ok") for r in reports]
    status = max(statuses, key=lambda s: order.index(s) if s in order else 0, default="ok")
    return {
        "schema_version": SCHEMA_VERSION,
        "generated_at": generated_at or _now(),
        "command": "report merge",
        "status": status,
        "config": None,
        "result": {"reports": [dict(r) for r in reports]},
    }
