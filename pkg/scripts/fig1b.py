"""Rescaled Fisher information against pixel size (Poisson and Gaussian-diagonal).

Dense log-spaced sweep of dx / xi with the dip on a pixel border; writes CSV
for external plotting.
"""

import argparse

import numpy as np

from solitoncrb.cli import pixel_sweep, render
from solitoncrb.config import RunConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-xi", type=float, default=50.0)
    ap.add_argument("--points", type=int, default=41)
    ap.add_argument("--out", default="fig1b.csv")
    args = ap.parse_args()
    dx = [float(v) for v in np.geomspace(0.05, 5.0, args.points)]
    cfg = RunConfig(pixel_sweep_n_xi=args.n_xi, dx_over_xi=dx)
    with open(args.out, "w") as fh:
        fh.write(render(pixel_sweep(cfg), cfg, "csv"))
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
