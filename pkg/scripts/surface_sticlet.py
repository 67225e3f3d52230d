"""n_U(t2, T) surface for the high-Chern model, plus its T = 0 Chern staircase."""

import os

from _common import ensure, parser
from uhlmann.sweep import SweepSpec, run_sweep, write_sweep_csv


def main():
    p = parser(__doc__, "data/fig_sticlet")
    p.add_argument("--t2-count", type=int, default=61)
    p.add_argument("--T-count", type=int, default=40)
    args = p.parse_args()
    spec = SweepSpec("sticlet", "t2", -4.0, 4.0, args.t2_count, 0.01, 3.0, args.T_count, T_scale="log", grid=args.grid)
    rows = run_sweep(spec, workers=args.threads)
    path = os.path.join(ensure(args.out), "n_U_surface.csv")
    write_sweep_csv(rows, path, spec)
    print(f"wrote {path} ({len(rows)} cells)")


if __name__ == "__main__":
    main()
