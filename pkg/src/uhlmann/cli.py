"""Batch command-line front end.

    uhlmann chern --model qwz --param u=-1.5 --grid 256
    uhlmann uhlmann --model sticlet --param t2=0.5 --T 0.5
    uhlmann kernel --T 1.0 --omega-max 20 --out kernel.csv
    uhlmann sweep --config sweep.json --threads 8 --out sweep.csv

Exit status: 0 success, 2 invalid input, 3 numerical failure.
"""

import argparse
import json
import logging
import math
import os
import sys
import warnings
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import geometry, lehmann, response
from .errors import GapClosureError, NumericalError, ValidationError
from .io import dumps, write_table
from .models import band_gap, get_model
from .quadrature import BZGrid
from .sweep import SweepSpec, run_sweep, write_sweep_csv

log = logging.getLogger("uhlmann")

COMMANDS = ("chern", "uhlmann", "muc-map", "conductivity", "kernel", "tknn-check", "sweep", "lehmann-check")
NEEDS_TEMPERATURE = {"uhlmann", "conductivity", "kernel", "tknn-check"}
NEEDS_MODEL = {"chern", "uhlmann", "muc-map", "conductivity", "tknn-check"}
NEAR_CRITICAL_GAP = 1e-2
TKNN_TOLERANCE = 0.02
LEHMANN_TOLERANCES = {"chi_vs_structure_factor": 1e-12, "chi_vs_sld": 1e-8}

# shapes of the JSON documents written with --format json
JSON_SCHEMAS = {
    "scalar": {
        "type": "object",
        "required": ["command", "results"],
        "properties": {
            "command": {"type": "string"},
            "model": {"type": ["string", "null"]},
            "params": {"type": "object"},
            "beta": {"type": ["number", "string", "null"]},
            "grid": {"type": ["integer", "null"]},
            "results": {"type": "object"},
        },
    },
    "trace": {
        "type": "object",
        "required": ["meta", "omega", "value", "error_estimate"],
        "properties": {
            "meta": {"type": "object"},
            "omega": {"type": "array", "items": {"type": "number"}},
            "value": {"type": "array", "items": {"type": "number"}},
            "error_estimate": {"type": "array", "items": {"type": "number"}},
        },
    },
    "table": {
        "type": "object",
        "required": ["meta", "columns", "rows"],
        "properties": {
            "meta": {"type": "object"},
            "columns": {"type": "array", "items": {"type": "string"}},
            "rows": {"type": "array", "items": {"type": "array"}},
        },
    },
}


@dataclass
class RunConfig:
    command: str
    model: str | None = None
    params: dict = field(default_factory=dict)
    beta: float | None = None
    T: float | None = None
    grid: int = 256
    omega_min: float | None = None
    omega_max: float | None = None
    omega_count: int | None = None
    eta: float | None = None
    units: str = "e2/h"
    ensemble: str = "fock"
    kind: str = "muc"
    out: str | None = None
    format: str = "csv"
    threads: int = 1
    seed: int = 0
    count: int = 50
    sweep: dict | None = None

    def validate(self):
        if self.command not in COMMANDS:
            raise ValidationError(f"unknown command {self.command!r}")
        if self.beta is not None and self.T is not None:
            raise ValidationError("give exactly one of --T / --beta")
        needs_t = self.command in NEEDS_TEMPERATURE or (self.command == "muc-map" and self.kind == "muc")
        if needs_t and self.beta is None and self.T is None:
            raise ValidationError(f"{self.command} needs --T or --beta")
        if self.command in NEEDS_MODEL and not self.model:
            raise ValidationError(f"{self.command} needs --model")
        if self.format not in ("csv", "json"):
            raise ValidationError("--format must be csv or json")
        if self.kind not in ("muc", "berry"):
            raise ValidationError("--kind must be muc or berry")
        if self.threads < 1:
            raise ValidationError("--threads must be >= 1")
        if self.omega_count is not None and self.omega_count < 2:
            raise ValidationError("--omega-count must be >= 2")
        BZGrid(self.grid)
        return self

    def context(self):
        if self.beta is not None:
            return geometry.ThermalContext(float(self.beta), self.ensemble)
        return geometry.ThermalContext.from_temperature(self.T, self.ensemble)

    def field(self):
        return get_model(self.model, self.params)


def _parse_param(text):
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected name=value, got {text!r}")
    name, value = text.split("=", 1)
    try:
        return name.strip(), float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"parameter value must be a number: {text!r}")


def _parse_range(text):
    """'min:max:count' or 'name=min:max:count'."""
    name = None
    if "=" in text:
        name, text = text.split("=", 1)
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected min:max:count, got {text!r}")
    try:
        return name, float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad range {text!r}")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file; flags override its values")
    common.add_argument("--model", choices=["qwz", "sticlet"])
    common.add_argument("--param", action="append", type=_parse_param, metavar="NAME=VALUE")
    temp = common.add_mutually_exclusive_group()
    temp.add_argument("--T", type=float, dest="T", help="temperature k_B T")
    temp.add_argument("--beta", type=float)
    common.add_argument("--grid", type=int, help="BZ nodes per axis (default 256)")
    common.add_argument("--omega-min", type=float)
    common.add_argument("--omega-max", type=float)
    common.add_argument("--omega-count", type=int)
    common.add_argument("--eta", type=float, help="PV regulator (default from the grid)")
    common.add_argument("--units", choices=["e2/h", "e2/hbar"])
    common.add_argument("--ensemble", choices=list(geometry.ENSEMBLES))
    common.add_argument("--threads", type=int, help="worker threads (default $UHLMANN_THREADS or 1)")
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--format", choices=["csv", "json"])
    common.add_argument("--seed", type=int)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="uhlmann", description="Finite-temperature Uhlmann geometry of two-band models.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    sub.add_parser("chern", parents=[common], help="Chern number: lattice integer and quadrature")
    sub.add_parser("uhlmann", parents=[common], help="Uhlmann number and the E-field MUC")
    p = sub.add_parser("muc-map", parents=[common], help="curvature on the BZ grid as CSV")
    p.add_argument("--kind", choices=["muc", "berry"])
    sub.add_parser("conductivity", parents=[common], help="transverse conductivity trace")
    sub.add_parser("kernel", parents=[common], help="thermal kernel K_beta trace")
    sub.add_parser("tknn-check", parents=[common], help="both sides of the generalised TKNN identity")
    p = sub.add_parser("sweep", parents=[common], help="n_U over a (param, T) table")
    p.add_argument("--param-range", type=_parse_range, metavar="NAME=MIN:MAX:COUNT")
    p.add_argument("--T-range", type=_parse_range, dest="T_range", metavar="MIN:MAX:COUNT")
    p.add_argument("--T-scale", choices=["linear", "log"], dest="T_scale")
    p = sub.add_parser("lehmann-check", parents=[common], help="Lehmann vs SLD oracle suite on random systems")
    p.add_argument("--count", type=int)
    return parser


def _load_config(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read config {path}: {exc}")
    if not isinstance(data, dict):
        raise ValidationError("config file must hold a JSON object")
    known = {f.name for f in fields(RunConfig)} - {"command"}
    unknown = set(data) - known
    if unknown:
        raise ValidationError(f"unknown config keys {sorted(unknown)}")
    return data


def config_from_args(args, environ=None):
    environ = os.environ if environ is None else environ
    merged = {}
    if args.config:
        merged.update(_load_config(args.config))
    if "threads" not in merged and environ.get("UHLMANN_THREADS"):
        try:
            merged["threads"] = int(environ["UHLMANN_THREADS"])
        except ValueError:
            raise ValidationError("UHLMANN_THREADS must be an integer")
    flag_names = ["model", "beta", "T", "grid", "omega_min", "omega_max", "omega_count", "eta", "units",
                  "ensemble", "out", "format", "threads", "seed", "kind", "count"]
    for name in flag_names:
        value = getattr(args, name, None)
        if value is not None:
            merged[name] = value
    if args.T is not None:
        merged.pop("beta", None)
    if args.beta is not None:
        merged.pop("T", None)
    if args.param:
        params = dict(merged.get("params") or {})
        params.update(dict(args.param))
        merged["params"] = params
    sweep = dict(merged.get("sweep") or {})
    if getattr(args, "param_range", None):
        name, lo, hi, n = args.param_range
        if name:
            sweep["param_name"] = name
        sweep.update(param_min=lo, param_max=hi, param_count=n)
    if getattr(args, "T_range", None):
        _, lo, hi, n = args.T_range
        sweep.update(T_min=lo, T_max=hi, T_count=n)
    if getattr(args, "T_scale", None):
        sweep["T_scale"] = args.T_scale
    if sweep:
        merged["sweep"] = sweep
    return RunConfig(command=args.command, **merged).validate()


def _fmt(x):
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return f"{float(x):#.9g}"


def _beta_meta(ctx):
    return "inf" if ctx.zero_temperature else ctx.beta


def _scalar_output(cfg, results, ctx=None, out=None):
    out = out or sys.stdout
    for key, value in results.items():
        print(f"{key} {_fmt(value)}" if not isinstance(value, str) else f"{key} {value}", file=out)
    doc = {
        "command": cfg.command,
        "model": cfg.model,
        "params": cfg.params,
        "beta": None if ctx is None else _beta_meta(ctx),
        "grid": cfg.grid,
        "results": results,
    }
    if cfg.out:
        if cfg.format == "json":
            with open(cfg.out, "w") as fh:
                fh.write(dumps(doc) + "\n")
        else:
            meta = {k: v for k, v in doc.items() if k != "results"}
            write_table(cfg.out, list(results), [list(results.values())], meta)


def _trace_output(cfg, trace):
    if cfg.format == "json":
        doc = {
            "meta": dict(trace.meta, beta=trace.beta),
            "omega": trace.omegas.tolist(),
            "value": trace.values.tolist(),
            "error_estimate": trace.errors.tolist(),
        }
        text = dumps(doc) + "\n"
        if cfg.out:
            with open(cfg.out, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    else:
        trace.to_csv(cfg.out)


def omega_grid(cfg, default_max, symmetric):
    """Frequencies from --omega-min/max/count; symmetric grids keep an exact 0."""
    w_max = default_max if cfg.omega_max is None else cfg.omega_max
    w_min = (-w_max if symmetric else 0.0) if cfg.omega_min is None else cfg.omega_min
    count = cfg.omega_count or 401
    if w_max <= w_min:
        raise ValidationError("--omega-max must exceed --omega-min")
    if w_min == -w_max and count % 2 == 1:
        half = np.linspace(0.0, w_max, (count + 1) // 2)
        return np.concatenate([-half[:0:-1], half])
    return np.linspace(w_min, w_max, count)


def _grid_for(cfg, field):
    grid = BZGrid(cfg.grid)
    gap = band_gap(field, grid) if min(grid.nx, grid.ny) >= 64 else None
    if gap is not None and gap < NEAR_CRITICAL_GAP:
        if gap < 1e-8:
            raise GapClosureError(f"gap {gap:.3g}: the model is at a phase boundary")
        log.warning("gap %.3g below %g: refining the grid once to %d", gap, NEAR_CRITICAL_GAP, 2 * grid.nx)
        grid = grid.refined()
    return grid


def cmd_chern(cfg):
    field = cfg.field()
    grid = _grid_for(cfg, field)
    results = {
        "chern_fhs": geometry.chern_fhs(field, grid),
        "chern_quadrature": geometry.chern_number(field, grid, workers=cfg.threads),
    }
    _scalar_output(cfg, results)


def cmd_uhlmann(cfg):
    field, ctx = cfg.field(), cfg.context()
    grid = _grid_for(cfg, field)
    n_u = geometry.uhlmann_number(field, ctx, grid, workers=cfg.threads)
    _scalar_output(cfg, {"n_U": n_u, "U_ExEy": response.efield_muc_report(n_u)}, ctx)


def cmd_muc_map(cfg):
    field = cfg.field()
    grid = _grid_for(cfg, field)
    ctx = cfg.context() if cfg.kind == "muc" else None
    cmap = geometry.curvature_map(field, grid, ctx, workers=cfg.threads)
    if cfg.format == "json":
        kx, ky = grid.mesh()
        rows = [list(r) for r in zip(kx.ravel().tolist(), ky.ravel().tolist(), cmap.values.ravel().tolist())]
        doc = {"meta": dict(cmap.meta, kind=cmap.kind), "columns": ["kx", "ky", "value"], "rows": rows}
        _write_text(cfg.out, dumps(doc) + "\n")
    else:
        cmap.to_csv(cfg.out)


def _write_text(path, text):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_conductivity(cfg):
    field, ctx = cfg.field(), cfg.context()
    grid = _grid_for(cfg, field)
    omegas = omega_grid(cfg, 12.0, symmetric=False)
    trace = response.conductivity_trace(field, omegas, ctx, grid, eta=cfg.eta, units=cfg.units, workers=cfg.threads)
    _trace_output(cfg, trace)


def cmd_kernel(cfg):
    ctx = cfg.context()
    trace = response.kernel_trace(ctx, omega_grid(cfg, 20.0, symmetric=True))
    _trace_output(cfg, trace)


def cmd_tknn_check(cfg):
    field, ctx = cfg.field(), cfg.context()
    grid = _grid_for(cfg, field)
    n_bz = geometry.uhlmann_number(field, ctx, grid, workers=cfg.threads)
    n_w, err = response.tknn_frequency_side(field, ctx, grid, eta=cfg.eta, workers=cfg.threads)
    deviation = abs(n_w - n_bz) / max(1.0, abs(n_bz))
    results = {
        "n_U_bz": n_bz,
        "n_U_frequency": n_w,
        "error_estimate": err,
        "relative_deviation": deviation,
        "tolerance": TKNN_TOLERANCE,
    }
    _scalar_output(cfg, results, ctx)
    if deviation > TKNN_TOLERANCE:
        raise NumericalError(f"TKNN sides differ by {deviation:.3g} > {TKNN_TOLERANCE}")


def cmd_sweep(cfg):
    data = dict(cfg.sweep or {})
    data.setdefault("model", cfg.model)
    data.setdefault("grid", cfg.grid)
    data.setdefault("ensemble", cfg.ensemble)
    if "param_name" not in data and cfg.model:
        from .models import MODELS

        data["param_name"] = MODELS[cfg.model][1][0]
    spec = SweepSpec.from_dict(data)

    def progress(done, total):
        if done == total or done % max(1, total // 10) == 0:
            log.info("sweep %d/%d cells", done, total)

    rows = run_sweep(spec, workers=cfg.threads, progress=progress)
    if cfg.format == "json":
        from .sweep import COLUMNS

        doc = {"meta": asdict(spec), "columns": COLUMNS, "rows": [r.as_list() for r in rows]}
        _write_text(cfg.out, dumps(doc) + "\n")
    else:
        write_sweep_csv(rows, cfg.out, spec)


def cmd_lehmann_check(cfg):
    records = lehmann.oracle_suite(cfg.seed, cfg.count)
    d_s = max(abs(r["chi"] - r["structure_factor"]) for r in records)
    d_l = max(abs(r["chi"] - r["sld"]) for r in records)
    results = {"systems": len(records), "seed": cfg.seed, "max_chi_vs_structure_factor": d_s, "max_chi_vs_sld": d_l}
    _scalar_output(cfg, results)
    if d_s > LEHMANN_TOLERANCES["chi_vs_structure_factor"] or d_l > LEHMANN_TOLERANCES["chi_vs_sld"]:
        raise NumericalError("Lehmann routes disagree with the SLD oracle")


HANDLERS = {
    "chern": cmd_chern,
    "uhlmann": cmd_uhlmann,
    "muc-map": cmd_muc_map,
    "conductivity": cmd_conductivity,
    "kernel": cmd_kernel,
    "tknn-check": cmd_tknn_check,
    "sweep": cmd_sweep,
    "lehmann-check": cmd_lehmann_check,
}


def run(cfg):
    HANDLERS[cfg.command](cfg)
    return 0


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        cfg = config_from_args(args)
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return run(cfg)
    except ValidationError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
