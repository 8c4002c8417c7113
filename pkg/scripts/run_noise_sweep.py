#!/usr/bin/env python3
"""Stress the search when the data distribution differs from the model.

The tree is built from the nominal model while the data are drawn from a
multiplicatively perturbed version (each cell scaled by a factor in
[1 - eps, 1 + eps], renormalized).  The band count is inflated by
(1 + eps)^depth to compensate; the script prints recall and total work
per N plus the fitted work slope next to the analytic robustness bound.
"""

import argparse
import json

import numpy as np

from forestdsh import bench, data, model, solver, tree as tree_mod

P_STRONG = [[0.345, 0.0], [0.31, 0.345]]
P_WEAK = [[0.019625, 0.0], [0.036875, 0.9435]]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--t", type=float, default=0.25)
    ap.add_argument("--epsilon", type=float, default=0.03)
    ap.add_argument("--n-values", type=int, nargs="+",
                    default=[128, 256, 512, 1024, 2048])
    ap.add_argument("--s", type=int, default=500)
    ap.add_argument("--c", type=float, default=0.5)
    ap.add_argument("--tp-target", type=float, default=0.99)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", help="optional JSON output path")
    args = ap.parse_args()

    jd = data.interpolate(model.from_matrix(P_STRONG, None),
                          model.from_matrix(P_WEAK, None), args.t)
    hp = solver.solve_params(jd, model.ProblemDims(n=max(args.n_values),
                                                   m=max(args.n_values), s=args.s))
    bound = solver.noise_complexity_bound(hp, jd, args.epsilon)
    perturbed = data.perturb(jd, args.epsilon, seed=args.seed)

    rows = []
    print(f"lambda*={hp.lam:.4f}  robustness bound={bound:.4f}  eps={args.epsilon}")
    print(f"{'N':>6} {'bands':>7} {'recall':>8} {'work':>12}")
    for n in args.n_values:
        dims = model.ProblemDims(n=n, m=n, s=args.s)
        tree = tree_mod.build_tree(jd, hp, dims, c1=args.c, c2=args.c, c3=args.c)
        stats = tree_mod.family_stats(tree, args.tp_target)
        n_bands = int(np.ceil(stats.n_bands * (1 + args.epsilon) ** tree.max_bucket_depth))
        rec = bench.measure_recall_and_work(tree, jd, dims, n_bands,
                                            seed=args.seed + 1, data_jd=perturbed)
        work = rec.raw_positives + rec.insertions + rec.tree_nodes + 2 * n * n_bands
        rows.append({"n": n, "n_bands": n_bands, "recall": rec.recall, "work": work})
        print(f"{n:>6} {n_bands:>7} {rec.recall:>8.3f} {work:>12,}")
    slope = float(np.polyfit(np.log([r["n"] for r in rows]),
                             np.log([r["work"] for r in rows]), 1)[0])
    print(f"\nfitted work slope {slope:.4f}  (bound {bound:.4f})")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump({"rows": rows, "slope": slope, "bound": bound}, fh, indent=2)
        print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
