"""Deterministic file output: fixed float formatting and atomic replacement."""
import csv
import io
import json
import math
import os
import tempfile

import numpy as np

JSON_DIGITS = 17
CSV_DIGITS = 12


def _float_token(x, digits):
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    if x == 0:
        return "0"
    return format(x, f".{digits}g")


def _plain(obj):
    """Convert numpy scalars/arrays and tuples to plain JSON-able Python objects."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    return obj


def _encode(obj, indent, level, digits):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        return _float_token(obj, digits)
    if isinstance(obj, (int, str)):
        return json.dumps(obj)
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1, digits) for v in obj) + "]"
        items = [pad + _encode(v, indent, level + 1, digits) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [pad + json.dumps(k) + ": " + _encode(v, indent, level + 1, digits)
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_json(obj, digits=JSON_DIGITS, indent=2):
    """JSON text with every float printed to ``digits`` significant digits."""
    return _encode(_plain(obj), indent, 0, digits) + "\n"


def atomic_write_text(path, text):
    """Write ``text`` to ``path`` via a temporary file in the same directory and ``os.replace``."""
    path = os.fspath(path)
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path, obj, digits=JSON_DIGITS):
    atomic_write_text(path, dumps_json(obj, digits))


def csv_text(header, rows, digits=CSV_DIGITS):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v, digits) for v in row])
    return buf.getvalue()


def _cell(v, digits):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return _float_token(float(v), digits)
    return str(v)


def write_csv(path, header, rows, digits=CSV_DIGITS):
    atomic_write_text(path, csv_text(header, rows, digits))
