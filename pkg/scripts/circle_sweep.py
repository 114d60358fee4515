"""Build circle and affine approximations over a range of U radii and print
grid size, defects, retries and build time as CSV."""
import argparse
import csv
import sys
import time

from quasiapprox import (ApproximationProblem, CompactRegion, Neighborhood, build_approximation,
                         get_model)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--radii", type=float, nargs="+", default=[0.2, 0.1, 0.05, 0.02, 0.01])
    ap.add_argument("--affine", action="store_true", help="also sweep the affine patch")
    args = ap.parse_args()

    cases = [("circle", None, side) for side in ("left", "right")]
    if args.affine:
        patch = CompactRegion(((0.5, 2.0), (-1.0, 1.0)))
        cases += [("affine", patch, side) for side in ("left", "right")]
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["model", "side", "u_radius", "n", "grid_defect", "hom_defect", "retries", "seconds"])
    for name, region, side in cases:
        m = get_model(name)
        for u in args.radii:
            p = ApproximationProblem(m, region or m.full_region(), Neighborhood(u), side)
            t0 = time.perf_counter()
            q, r = build_approximation(p)
            w.writerow([name, side, u, q.n, r.grid_defect, r.hom_defect, r.retries,
                        round(time.perf_counter() - t0, 3)])


if __name__ == "__main__":
    main()
