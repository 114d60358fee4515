"""Haar functional sweep: sin^2 on the circle against its exact integral and a
midpoint Riemann sum, plus left-shift margins of a bump on the affine group."""
import argparse
import math
import sys

import numpy as np

from quasiapprox import (ApproximationProblem, CompactRegion, Neighborhood, build_approximation,
                         get_model)
from quasiapprox.haar import bump, rows_to_csv, sweep_row, trig


def circle_rows(radii, shifts):
    m = get_model("circle")
    f = trig(m, 1)
    rows = []
    for u in radii:
        q, _ = build_approximation(ApproximationProblem(m, m.full_region(), Neighborhood(u)))
        row = sweep_row(q, f, m.full_region(), shifts, u)
        row["riemann"] = math.fsum(math.sin(2 * math.pi * (i + 0.5) / q.n) ** 2
                                   for i in range(q.n)) / q.n
        rows.append(row)
    return rows


def affine_rows(radii, n_shifts, seed):
    m = get_model("affine")
    C = CompactRegion(((0.5, 2.0), (-1.0, 1.0)))
    f = bump(m, (1.0, 0.0), 0.5)
    rng = np.random.default_rng(seed)
    shifts = [(float(a), float(b)) for a, b in zip(rng.uniform(0.8, 1.25, n_shifts),
                                                    rng.uniform(-0.3, 0.3, n_shifts))]
    rows = []
    for u in radii:
        q, _ = build_approximation(ApproximationProblem(m, C, Neighborhood(u)))
        rows.append(sweep_row(q, f, C, shifts, u))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--radii", type=float, nargs="+", default=[0.1, 0.01, 0.001])
    ap.add_argument("--affine-radii", type=float, nargs="+", default=[0.4, 0.3, 0.2])
    ap.add_argument("--shifts", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    shifts = [(h,) for h in np.linspace(0, 1, args.shifts, endpoint=False)]
    cols = ["u_radius", "grid_size", "value", "analytic", "abs_error", "riemann", "max_deviation"]
    sys.stdout.write("# circle, f = sin^2(2 pi x)\n")
    sys.stdout.write(rows_to_csv(circle_rows(args.radii, shifts), cols))
    sys.stdout.write("# affine, bump at (1, 0)\n")
    cols = ["u_radius", "grid_size", "value", "min_margin", "max_deviation"]
    sys.stdout.write(rows_to_csv(affine_rows(args.affine_radii, args.shifts, args.seed), cols))


if __name__ == "__main__":
    main()
