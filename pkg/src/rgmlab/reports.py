"""Deterministic JSON reports and CSV tables."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, is_dataclass, asdict

import numpy as np


@dataclass
class Table:
    columns: tuple
    rows: list


def format_cell(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.9g}"
    return str(v)


def csv_text(table):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.columns)
    for row in table.rows:
        w.writerow([format_cell(v) for v in row])
    return buf.getvalue()


def emit_csv(table, path):
    """Write ``table`` with a header row and 9 significant digits per float."""
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(csv_text(table))
    except OSError as exc:
        raise OSError(f"{path}: {exc.strerror}") from None


def plain(obj):
    """JSON-ready copy: dataclasses to dicts, numpy to Python, non-finite floats to strings."""
    if is_dataclass(obj) and not isinstance(obj, type):
        return plain(obj.to_dict() if hasattr(obj, "to_dict") else asdict(obj))
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else format_cell(v)
    return obj


def report_text(report):
    return json.dumps(plain(report), indent=2, sort_keys=True) + "\n"


def emit_report(report, path):
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(report_text(report))
    except OSError as exc:
        raise OSError(f"{path}: {exc.strerror}") from None
