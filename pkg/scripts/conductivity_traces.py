"""sigma~_xy(w) and K_beta(w) traces: sticlet t2 = 0.5 and QWZ u = -1.5, -2.1."""

import os
import warnings

import numpy as np

from _common import ensure, parser
from uhlmann.geometry import ThermalContext
from uhlmann.models import qwz_field, sticlet_field
from uhlmann.quadrature import BZGrid
from uhlmann.response import PVAccuracyWarning, conductivity_trace, kernel_trace

CASES = [
    ("sticlet_t2_0.5", sticlet_field(0.5), (0.05, 1.0), 14.0),
    ("qwz_u_-1.5", qwz_field(-1.5), (0.05, 0.5), 8.0),
    ("qwz_u_-2.1", qwz_field(-2.1), (0.05, 0.5), 8.0),
]


def main():
    args = parser(__doc__, "data/fig_conductivity").parse_args()
    out = ensure(args.out)
    grid = BZGrid(args.grid)
    for name, field, temps, w_max in CASES:
        w = np.linspace(0.0, w_max, 1401)
        for T in temps:
            ctx = ThermalContext.from_temperature(T)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", PVAccuracyWarning)
                conductivity_trace(field, w, ctx, grid, workers=args.threads).to_csv(
                    os.path.join(out, f"sigma_{name}_T{T:g}.csv"))
            kernel_trace(ctx, w).to_csv(os.path.join(out, f"kernel_T{T:g}.csv"))
    print(f"wrote traces to {out}")


if __name__ == "__main__":
    main()
