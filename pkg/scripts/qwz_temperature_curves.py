"""n_U(T) for QWZ u = -1.5 (monotone) and u = -2.1 (non-monotone)."""

import os

import numpy as np

from _common import ensure, parser
from uhlmann.geometry import ThermalContext, uhlmann_number
from uhlmann.io import write_table
from uhlmann.models import qwz_field
from uhlmann.quadrature import BZGrid


def main():
    args = parser(__doc__, "data/fig_qwz_T").parse_args()
    grid = BZGrid(args.grid)
    temps = np.geomspace(0.01, 5.0, 80)
    rows = []
    for u in (-1.5, -2.1):
        field = qwz_field(u)
        for T in temps:
            rows.append([u, T, uhlmann_number(field, ThermalContext.from_temperature(T), grid, args.threads)])
    path = os.path.join(ensure(args.out), "n_U_vs_T.csv")
    write_table(path, ["u", "T", "n_U"], rows, {"model": "qwz", "grid": args.grid})
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
