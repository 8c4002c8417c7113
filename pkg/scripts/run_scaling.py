#!/usr/bin/env python3
"""Measure how tree size and bucket-mass ratios grow with the database size.

Builds one tree per N on a correlation-interpolated 2x2 model, prints the
per-N table, and reports the fitted log-log slopes next to the exponents
predicted by the solved hashing parameters.
"""

import argparse
import json

import numpy as np

from forestdsh import bench, data, model, solver

P_STRONG = [[0.345, 0.0], [0.31, 0.345]]
P_WEAK = [[0.019625, 0.0], [0.036875, 0.9435]]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--t", type=float, default=0.25,
                    help="interpolation weight between the strong and weak models")
    ap.add_argument("--n-min", type=int, default=128)
    ap.add_argument("--n-max", type=int, default=4096)
    ap.add_argument("--points", type=int, default=13)
    ap.add_argument("--s", type=int, default=1000)
    ap.add_argument("--c1", type=float, default=0.2)
    ap.add_argument("--c2", type=float, default=0.2)
    ap.add_argument("--c3", type=float, default=0.4)
    ap.add_argument("--out", help="optional JSON output path")
    args = ap.parse_args()

    jd = data.interpolate(model.from_matrix(P_STRONG, None),
                          model.from_matrix(P_WEAK, None), args.t)
    dims = model.ProblemDims(n=args.n_max, m=args.n_max, s=args.s)
    hp = solver.solve_params(jd, dims)
    n_values = sorted(set(int(round(v))
                          for v in np.geomspace(args.n_min, args.n_max, args.points)))
    rows, slopes = bench.scaling_sweep(jd, hp, n_values, args.s,
                                       args.c1, args.c2, args.c3)

    print(f"t={args.t}  lambda*={hp.lam:.4f}  delta={hp.delta:.3f}")
    print(f"{'N':>6} {'nodes':>8} {'a/b':>12} {'a/gA':>12} {'a/gB':>12}")
    for r in rows:
        print(f"{r['n']:>6} {r['nodes']:>8} {r['alpha_over_beta']:>12.4g} "
              f"{r['alpha_over_gamma_a']:>12.4g} {r['alpha_over_gamma_b']:>12.4g}")
    targets = {
        "nodes": hp.lam,
        "alpha_over_beta": 1 + hp.delta - hp.lam,
        "alpha_over_gamma_a": 1 - hp.lam,
        "alpha_over_gamma_b": hp.delta - hp.lam,
    }
    print("\nfitted slope vs predicted exponent:")
    for key, target in targets.items():
        print(f"  {key:<20} {slopes[key]:+.4f}  (predicted {target:+.4f})")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump({"rows": rows, "slopes": slopes, "targets": targets}, fh, indent=2)
        print(f"\nwrote {args.out}")


if __name__ == "__main__":
    main()
