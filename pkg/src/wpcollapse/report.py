"""Bit-stable JSON and CSV emission.

Floats are rendered with 17 significant digits, keys are sorted, NaN becomes
``null`` in JSON and ``nan`` in CSV, and files are written through a
temporary file and an atomic rename.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .collapse import CSV_COLUMNS, CollapseReport


def fmt_float(x: float) -> str:
    s = format(float(x), ".17g")
    if not any(c in s for c in ".eni"):
        s += ".0"
    return s


def to_plain(obj):
    """Convert dataclasses, tuples and numpy values into JSON-ready Python."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def _encode(obj, out: list):
    if obj is None:
        out.append("null")
    elif isinstance(obj, bool):
        out.append("true" if obj else "false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append("null" if not math.isfinite(obj) else fmt_float(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, list):
        out.append("[")
        for i, v in enumerate(obj):
            if i:
                out.append(", ")
            _encode(v, out)
        out.append("]")
    elif isinstance(obj, dict):
        out.append("{")
        for i, k in enumerate(sorted(obj)):
            if i:
                out.append(", ")
            out.append(json.dumps(k) + ": ")
            _encode(obj[k], out)
        out.append("}")
    else:
        raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(obj) -> str:
    out: list[str] = []
    _encode(to_plain(obj), out)
    return "".join(out) + "\n"


def write_atomic(path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _cell(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    return "nan" if math.isnan(v) else fmt_float(v)


def report_csv(report: CollapseReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in sorted(report.rows, key=lambda r: r["n"]):
        w.writerow([_cell(row[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def report_json(report: CollapseReport) -> str:
    rows = sorted(report.rows, key=lambda r: r["n"])
    return dumps({"spec": report.spec, "rows": rows, "fits": report.fits})


def emit_report(report: CollapseReport, out_dir, fmt: str = "both") -> list[Path]:
    """Write ``report.json`` and/or ``report.csv`` into ``out_dir``."""
    if fmt not in ("json", "csv", "both"):
        raise ValueError(f"unknown format {fmt!r}")
    out_dir = Path(out_dir)
    written = []
    if fmt in ("json", "both"):
        write_atomic(out_dir / "report.json", report_json(report))
        written.append(out_dir / "report.json")
    if fmt in ("csv", "both"):
        write_atomic(out_dir / "report.csv", report_csv(report))
        written.append(out_dir / "report.csv")
    return written


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [{k: (int(v) if k == "n" else float(v)) for k, v in r.items()} for r in rows]
