"""Canonical report serialization and atomic file output.

JSON is canonical: sorted keys, no insignificant whitespace, floats with 17
significant digits (so every double round-trips).  Non-finite floats have no
JSON literal and are written as the strings ``"Infinity"``, ``"-Infinity"``
and ``"NaN"``.  CSV follows RFC 4180 (CRLF line ends, minimal quoting).
"""

import csv
import dataclasses
import io
import json
import math
import os
import tempfile

import numpy as np


class ReportIOError(OSError):
    """Failure to write a report, with the offending path in the message."""


def plain(obj):
    """Convert numpy scalars/arrays, tuples and dataclasses to JSON-ready values."""
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [plain(v) for v in obj.tolist()]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return plain(dataclasses.asdict(obj))
    return obj


def format_float(x):
    if math.isnan(x):
        return '"NaN"'
    if math.isinf(x):
        return '"Infinity"' if x > 0 else '"-Infinity"'
    s = format(x, ".17g")
    if "." not in s and "e" not in s and "n" not in s:
        s += ".0"  # keep floats distinguishable from integers
    return s


def canonical_json(obj):
    """Canonical JSON text of ``obj`` (see module docstring)."""
    obj = plain(obj)
    out = []

    def emit(v):
        if v is None:
            out.append("null")
        elif v is True:
            out.append("true")
        elif v is False:
            out.append("false")
        elif isinstance(v, int):
            out.append(str(v))
        elif isinstance(v, float):
            out.append(format_float(v))
        elif isinstance(v, str):
            out.append(json.dumps(v, ensure_ascii=False))
        elif isinstance(v, list):
            out.append("[")
            for i, item in enumerate(v):
                if i:
                    out.append(",")
                emit(item)
            out.append("]")
        elif isinstance(v, dict):
            out.append("{")
            for i, key in enumerate(sorted(v)):
                if i:
                    out.append(",")
                out.append(json.dumps(key, ensure_ascii=False))
                out.append(":")
                emit(v[key])
            out.append("}")
        else:
            raise TypeError(f"cannot serialize {type(v).__name__}")

    emit(obj)
    return "".join(out)


def _flatten(obj, prefix, rows):
    if isinstance(obj, dict):
        for k in sorted(obj):
            _flatten(obj[k], f"{prefix}.{k}" if prefix else str(k), rows)
    elif isinstance(obj, list):
        if not obj:
            rows.append((prefix, "[]"))
        for i, v in enumerate(obj):
            _flatten(v, f"{prefix}[{i}]", rows)
    else:
        if isinstance(obj, float):
            val = format_float(obj).strip('"')
        elif isinstance(obj, bool):
            val = "true" if obj else "false"
        elif obj is None:
            val = ""
        else:
            val = str(obj)
        rows.append((prefix, val))


def csv_text(header, rows):
    """RFC-4180 CSV: CRLF line ends, quoting only where needed."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n", quoting=csv.QUOTE_MINIMAL)
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def report_csv(report):
    """Flatten a report to two columns ``key,value`` (dotted key paths)."""
    rows = []
    _flatten(plain(report), "", rows)
    return csv_text(["key", "value"], rows)


def render(report, fmt="json"):
    if fmt == "json":
        return canonical_json(report) + "\n"
    if fmt == "csv":
        return report_csv(report)
    raise ValueError(f"unknown format {fmt!r}")


def atomic_write(path, text):
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    tmp = None
    try:
        fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        if tmp is not None and os.path.exists(tmp):
            os.unlink(tmp)
        raise ReportIOError(f"{path}: {exc.strerror or exc}") from exc


def emit_report(report, path, fmt="json"):
    atomic_write(path, render(report, fmt))
