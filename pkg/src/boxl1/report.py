"""CSV and JSON writers shared by the command-line tools."""

from __future__ import annotations

import csv
import json
import math
import sys
from pathlib import Path
from typing import Sequence

__all__ = ["write_rows", "json_safe", "dump_json"]


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_rows(rows: Sequence[dict], path: str | Path | None, columns: Sequence[str],
               stream=None) -> None:
    """CSV with a fixed column order; None becomes an empty field."""
    fh = open(path, "w", newline="") if path else (stream or sys.stdout)
    try:
        w = csv.writer(fh)
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(r.get(c)) for c in columns])
    finally:
        if path:
            fh.close()


def json_safe(obj):
    """Replace non-finite floats by strings so the output is strict JSON."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return "nan" if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    if isinstance(obj, dict):
        return {k: json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [json_safe(v) for v in obj]
    return obj


def dump_json(payload: dict, path: str | Path | None, stream=None) -> None:
    text = json.dumps(json_safe(payload), indent=1)
    if path:
        Path(path).write_text(text + "\n")
    else:
        (stream or sys.stdout).write(text + "\n")

