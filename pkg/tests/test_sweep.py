import io

import numpy as np
import pytest

from uhlmann.errors import ValidationError
from uhlmann.io import read_table
from uhlmann.sweep import COLUMNS, SweepSpec, rows_as_array, run_sweep, write_sweep_csv


def _spec(**kw):
    base = dict(model="qwz", param_name="u", param_min=-2.5, param_max=-1.5, param_count=3,
                T_min=0.05, T_max=2.0, T_count=4, T_scale="log", grid=64)
    base.update(kw)
    return SweepSpec(**base)


def _csv(rows, spec):
    buf = io.StringIO()
    import contextlib, sys

    with contextlib.redirect_stdout(buf):
        write_sweep_csv(rows, None, spec)
    return buf.getvalue()


def test_bitwise_identical_across_workers():
    spec = _spec()
    ref = _csv(run_sweep(spec, workers=1), spec)
    for w in (4, 8):
        assert _csv(run_sweep(spec, workers=w), spec) == ref


def test_critical_point_flagged_not_nan():
    spec = _spec(param_min=-2.0, param_max=-2.0, param_count=1, T_count=2)
    rows = run_sweep(spec)
    assert all(r.status == "critical" and r.n_U is None for r in rows)


def test_near_critical_point_refines():
    rows = run_sweep(_spec(param_min=-1.995, param_max=-1.995, param_count=1, T_count=1, grid=128))
    assert rows[0].status == "refined" and rows[0].chern == 1


def test_table_shape_and_order():
    spec = _spec(param_count=2, T_count=3, T_scale="linear")
    rows = run_sweep(spec, workers=3)
    assert [(r.param_value, r.T) for r in rows] == [(p, t) for p in spec.params() for t in spec.temperatures()]
    arr = rows_as_array(rows, spec)
    assert arr.shape == (2, 3) and np.all(np.isfinite(arr))
    meta, columns, body = read_table(io.StringIO(_csv(rows, spec)))
    assert columns == COLUMNS and len(body) == 6 and meta["model"] == "qwz"


@pytest.mark.parametrize(
    "bad",
    [dict(model="haldane"), dict(param_name="t2"), dict(T_min=0.0), dict(T_count=0), dict(T_scale="cubic"),
     dict(grid=4), dict(outputs=("n_U", "foo"))],
)
def test_spec_validation(bad):
    with pytest.raises(ValidationError):
        _spec(**bad)
    with pytest.raises(ValidationError):
        SweepSpec.from_dict({"model": "qwz"})
