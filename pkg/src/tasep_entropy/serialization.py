"""CSV and JSON emitters whose output survives a read/re-emit cycle byte for byte.

Floats are written with 17 significant digits, rationals as ``p/q``, and the
undefined-entropy sentinel as ``-inf``.
"""

from __future__ import annotations

import csv
import io
import json
import math
import re
from fractions import Fraction
from numbers import Integral

import numpy as np

JSON_SCHEMA = 1
_INT = re.compile(r"[+-]?\d+\Z")


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}" if v.denominator != 1 else str(v.numerator)
    if isinstance(v, Integral):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return "nan"
        return format(v, ".17g")
    if v is None:
        return ""
    return str(v)


def parse_value(text: str):
    """Inverse of :func:`format_value` up to the printed representation."""
    if text in ("true", "false"):
        return text == "true"
    if text == "":
        return None
    if "/" in text:
        return Fraction(text)
    if _INT.match(text):
        return int(text)
    try:
        return float(text)
    except ValueError:
        return text


def dumps_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_value(v) for v in row])
    return buf.getvalue()


def loads_csv(text: str):
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    return header, [[parse_value(c) for c in row] for row in reader]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, Fraction):
        return format_value(obj)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, Integral):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        # JSON has no infinities; keep the CSV spelling
        return v if math.isfinite(v) else format_value(v)
    return obj


def dumps_json(payload: dict) -> str:
    body = {"schema": JSON_SCHEMA}
    body.update(_jsonable(payload))
    return json.dumps(body, indent=2, sort_keys=True) + "\n"


def loads_json(text: str) -> dict:
    data = json.loads(text)
    if data.get("schema") != JSON_SCHEMA:
        raise ValueError(f"unsupported schema {data.get('schema')!r}")
    return data


def recanonicalize(text: str) -> str:
    """Parse emitted text and emit it again; a fixed point for our own output."""
    if text.lstrip().startswith("{"):
        data = loads_json(text)
        data.pop("schema")
        return dumps_json(data)
    header, rows = loads_csv(text)
    return dumps_csv(header, rows)
