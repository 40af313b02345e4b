"""Deterministic JSON reports and CSV plot data.

Reports are canonical: sorted keys, fixed indentation, no timestamps, floats
via repr. Re-running a command with the same config and seeds must produce a
byte-identical file, so nothing environment-dependent (absolute output paths,
hostnames, durations) belongs in a report.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from lumpkit import __version__
from lumpkit.errors import ValidationError

REPORT_SCHEMA = "lumpkit-report/v1"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    return obj


def make_report(command: str, config: dict, sections: dict, seeds: dict) -> dict:
    return {
        "schema": REPORT_SCHEMA,
        "tool_version": __version__,
        "command": command,
        "config": _jsonable(config),
        "seeds": _jsonable(seeds),
        "sections": _jsonable(sections),
    }


def dumps_report(report: dict) -> str:
    return json.dumps(_jsonable(report), sort_keys=True, indent=2) + "\n"


def write_report(path, report: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_report(report), encoding="utf-8")
    return path


def load_report(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def merge_reports(reports: list[dict]) -> dict:
    """Merge section files without recomputation; identical keys must agree."""
    if not reports:
        raise ValidationError("nothing to merge")
    merged = {
        "schema": REPORT_SCHEMA,
        "tool_version": reports[0]["tool_version"],
        "command": "report",
        "config": {"merged_commands": sorted({r.get("command", "?") for r in reports})},
        "seeds": {},
        "sections": {},
    }
    for rep in reports:
        if rep.get("schema") != REPORT_SCHEMA:
            raise ValidationError(f"unexpected report schema {rep.get('schema')!r}")
        for key, value in rep.get("sections", {}).items():
            if key in merged["sections"] and merged["sections"][key] != value:
                raise ValidationError(f"conflicting section {key!r} across reports")
            merged["sections"][key] = value
        for key, value in rep.get("seeds", {}).items():
            if key in merged["seeds"] and merged["seeds"][key] != value:
                raise ValidationError(f"conflicting seed entry {key!r} across reports")
            merged["seeds"][key] = value
    return merged


def write_csv(path, header: list[str], rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(["" if v is None else v for v in row])
    return path


def format_float(x) -> str:
    return repr(float(x))
