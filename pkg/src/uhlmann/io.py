"""CSV tables with a one-line JSON metadata header.

Layout::

    # {"model": "qwz", "params": {"u": -1.5}, "beta": 2.0, ...}
    kx,ky,value
    0,0,0.0199999999
    ...

Numbers are written with 9 significant digits; empty cells mean "not available".
"""

import csv
import io
import json
import math
import sys
from contextlib import contextmanager

SIG_DIGITS = 9


def fmt(x):
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, int)) and not isinstance(x, float):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return ""
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.{SIG_DIGITS}g}"


def _json_safe(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    return obj


def dumps(obj):
    return json.dumps(_json_safe(obj), sort_keys=True)


@contextmanager
def _open_out(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def write_table(path, columns, rows, meta=None):
    with _open_out(path) as fh:
        fh.write("# " + dumps(meta or {}) + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([fmt(v) for v in row])


def parse_cell(text):
    if text == "":
        return None
    try:
        return float(text)
    except ValueError:
        return text


def read_table(source):
    """Inverse of write_table: returns (meta, columns, rows) with numeric cells as floats."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, newline="") as fh:
            text = fh.read()
    lines = text.splitlines()
    if not lines or not lines[0].startswith("# "):
        raise ValueError("missing metadata header line")
    meta = json.loads(lines[0][2:])
    reader = csv.reader(io.StringIO("\n".join(lines[1:])))
    columns = next(reader)
    rows = []
    for raw in reader:
        if len(raw) != len(columns):
            raise ValueError(f"row has {len(raw)} cells, expected {len(columns)}")
        rows.append([parse_cell(c) for c in raw])
    return meta, columns, rows
