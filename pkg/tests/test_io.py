import io
import json
import math

import pytest
from hypothesis import given, strategies as st

from uhlmann.geometry import ThermalContext, curvature_map
from uhlmann.io import dumps, fmt, read_table, write_table
from uhlmann.models import qwz_field
from uhlmann.quadrature import BZGrid


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_nine_significant_digits(x):
    assert float(fmt(x)) == pytest.approx(x, rel=5e-9, abs=0)


def test_missing_values_and_specials():
    assert fmt(None) == "" and fmt(math.nan) == "" and fmt(math.inf) == "inf" and fmt(3) == "3"
    assert json.loads(dumps({"b": math.inf})) == {"b": "inf"}


def test_table_round_trip(tmp_path):
    path = tmp_path / "x.csv"
    write_table(path, ["a", "b", "s"], [[1.0, None, "ok"], [2.5e-11, -3, "critical"]], {"beta": math.inf})
    meta, cols, rows = read_table(path)
    assert meta == {"beta": "inf"} and cols == ["a", "b", "s"]
    assert rows == [[1.0, None, "ok"], [2.5e-11, -3.0, "critical"]]


def test_read_rejects_malformed():
    with pytest.raises(ValueError):
        read_table(io.StringIO("a,b\n1,2\n"))
    with pytest.raises(ValueError):
        read_table(io.StringIO("# {}\na,b\n1\n"))


def test_curvature_map_csv(tmp_path):
    grid = BZGrid(8)
    cmap = curvature_map(qwz_field(-1.0), grid, ThermalContext(2.0))
    path = tmp_path / "m.csv"
    cmap.to_csv(path)
    meta, cols, rows = read_table(path)
    assert cols == ["kx", "ky", "value"] and len(rows) == 64
    assert meta["kind"] == "muc" and meta["params"] == {"u": -1.0}
    assert rows[9][2] == pytest.approx(cmap.values[1, 1], rel=1e-8)
