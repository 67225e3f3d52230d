"""Parallel (parameter, temperature) sweeps of the Uhlmann number."""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError, ValidationError
from .geometry import ThermalContext, chern_fhs, uhlmann_number
from .io import write_table
from .models import MODELS, band_gap, get_model
from .quadrature import BZGrid

log = logging.getLogger(__name__)

CRITICAL_GAP = 1e-8
NEAR_CRITICAL_GAP = 1e-2
COLUMNS = ["param_name", "param_value", "T", "n_U", "chern", "gap", "status"]


@dataclass(frozen=True)
class SweepSpec:
    model: str
    param_name: str
    param_min: float
    param_max: float
    param_count: int
    T_min: float
    T_max: float
    T_count: int
    T_scale: str = "linear"
    grid: int = 256
    ensemble: str = "fock"
    outputs: tuple = ("n_U", "chern", "gap")

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValidationError(f"unknown model {self.model!r}")
        if self.param_name not in MODELS[self.model][1]:
            raise ValidationError(f"model {self.model!r} has no parameter {self.param_name!r}")
        if self.param_count < 1 or self.T_count < 1:
            raise ValidationError("axis counts must be >= 1")
        if not (self.T_min > 0 and self.T_max > 0):
            raise ValidationError("temperatures must be > 0")
        if self.T_scale not in ("linear", "log"):
            raise ValidationError("T_scale must be 'linear' or 'log'")
        unknown = set(self.outputs) - {"n_U", "chern", "gap"}
        if unknown:
            raise ValidationError(f"unknown outputs {sorted(unknown)}")
        BZGrid(self.grid)

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        if "outputs" in data:
            data["outputs"] = tuple(data["outputs"])
        try:
            return cls(**data)
        except TypeError as exc:
            raise ValidationError(f"bad sweep spec: {exc}")

    def params(self):
        return np.linspace(self.param_min, self.param_max, self.param_count)

    def temperatures(self):
        if self.T_scale == "log":
            return np.geomspace(self.T_min, self.T_max, self.T_count)
        return np.linspace(self.T_min, self.T_max, self.T_count)


@dataclass
class SweepRow:
    param_name: str
    param_value: float
    T: float
    n_U: float | None = None
    chern: int | None = None
    gap: float | None = None
    status: str = "ok"
    message: str = field(default="", repr=False)

    def as_list(self):
        return [self.param_name, self.param_value, self.T, self.n_U, self.chern, self.gap, self.status]


def _param_info(spec, value):
    """Gap, zero-temperature Chern number and the grid used for one parameter value."""
    field = get_model(spec.model, {spec.param_name: value})
    grid = BZGrid(spec.grid)
    gap = band_gap(field, grid)
    status = "ok"
    if gap < CRITICAL_GAP:
        return field, grid, gap, None, "critical"
    if gap < NEAR_CRITICAL_GAP:
        log.warning("gap %.3g at %s=%g: refining grid to %d", gap, spec.param_name, value, 2 * spec.grid)
        grid = grid.refined()
        status = "refined"
    chern = None
    if "chern" in spec.outputs:
        try:
            chern = chern_fhs(field, grid)
        except NumericalError as exc:
            log.warning("lattice Chern number failed at %s=%g: %s", spec.param_name, value, exc)
    return field, grid, gap, chern, status


def _cell(spec, info, value, T):
    field, grid, gap, chern, status = info
    row = SweepRow(spec.param_name, float(value), float(T), status=status)
    if "gap" in spec.outputs:
        row.gap = gap
    row.chern = chern
    if status == "critical":
        row.message = "gap closes"
        return row
    if "n_U" in spec.outputs:
        try:
            row.n_U = uhlmann_number(field, ThermalContext(1.0 / T, spec.ensemble), grid)
        except NumericalError as exc:
            row.status = "critical"
            row.message = str(exc)
    return row


def run_sweep(spec, workers=1, progress=None):
    """Evaluate every (param, T) cell; rows come back in param-major order.

    Cells are independent and sequential inside, so the table is identical for
    any worker count.  A failing cell records its status instead of aborting.
    """
    params = spec.params()
    temps = spec.temperatures()
    cells = [(i, j) for i in range(len(params)) for j in range(len(temps))]
    rows = [None] * len(cells)

    def info_for(value):
        try:
            return _param_info(spec, value)
        except Exception as exc:
            return None, None, None, None, f"error: {exc}"

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        infos = list(pool.map(info_for, params))

        def work(idx):
            i, j = cells[idx]
            info = infos[i]
            if info[0] is None:
                return SweepRow(spec.param_name, float(params[i]), float(temps[j]), status="error", message=info[4])
            try:
                return _cell(spec, info, params[i], temps[j])
            except Exception as exc:
                return SweepRow(spec.param_name, float(params[i]), float(temps[j]), status="error", message=str(exc))

        for idx, row in enumerate(pool.map(work, range(len(cells)))):
            rows[idx] = row
            if progress is not None:
                progress(idx + 1, len(cells))
    return rows


def write_sweep_csv(rows, path, spec=None):
    meta = {"columns": COLUMNS, "T_units": "k_B T in hopping units"}
    if spec is not None:
        meta.update(model=spec.model, grid=spec.grid, ensemble=spec.ensemble)
    write_table(path, COLUMNS, (r.as_list() for r in rows), meta)


def rows_as_array(rows, spec, column="n_U"):
    """One column of a sweep as a (param_count, T_count) array, NaN where missing."""
    values = [getattr(r, column) for r in rows]
    out = np.array([math.nan if v is None else v for v in values], dtype=float)
    return out.reshape(spec.param_count, spec.T_count)
