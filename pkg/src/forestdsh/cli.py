"""Command-line interface.

Exit codes: 0 on success, 2 on validation/configuration errors, 3 when a
runtime budget is exceeded.  The default seed comes from the
FOREST_DSH_SEED environment variable (0 if unset).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import numpy as np

from . import bands as bands_mod
from . import baselines, bench, data as data_mod, tree as tree_mod
from .errors import BudgetError, ValidationError
from .model import ProblemDims, load_model
from .solver import solve_params


def _default_seed() -> int:
    return int(os.environ.get("FOREST_DSH_SEED", "0"))


def _load_config(path: str) -> dict:
    if path.endswith(".toml"):
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    with open(path) as fh:
        return json.load(fh)


def _emit(doc) -> None:
    json.dump(doc, sys.stdout, indent=2, default=_json_default)
    sys.stdout.write("\n")


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _cmd_solve_params(args) -> None:
    jd = load_model(args.model)
    dims = ProblemDims(n=args.n, m=args.m, s=args.s)
    params = solve_params(
        jd, dims, grid_max=args.grid_max, grid_step=args.grid_step, coarse_tol=args.tol
    )
    _emit(
        {
            "mu": params.mu,
            "nu": params.nu,
            "eta": params.eta,
            "lambda": params.lam,
            "delta": params.delta,
            "p0": params.p0,
            "q0": params.q0,
            "r_star": params.r_star.tolist(),
            "n_star": params.n_star,
        }
    )


def _cmd_build_tree(args) -> None:
    jd = load_model(args.model)
    dims = ProblemDims(n=args.n, m=args.m, s=args.s)
    params = solve_params(jd, dims, grid_max=args.grid_max)
    tree = tree_mod.build_tree(
        jd, params, dims,
        c1=args.c1, c2=args.c2, c3=args.c3,
        max_depth=args.max_depth, max_nodes=args.max_nodes,
    )
    stats = tree_mod.family_stats(tree, args.tp_target)
    if args.out:
        tree_mod.save_tree(tree, args.out)
    _emit(
        {
            "nodes": len(tree.nodes),
            "buckets": len(tree.buckets),
            "alpha": stats.alpha,
            "beta": stats.beta,
            "gamma_a": stats.gamma_a,
            "gamma_b": stats.gamma_b,
            "n_bands": stats.n_bands,
        }
    )


def _cmd_index(args) -> None:
    tree = tree_mod.load_tree(args.tree)
    x = data_mod.read_sequences(args.data)
    bands = bands_mod.BandSet.make(args.bands, x.shape[1], args.seed)
    index = bands_mod.build_index(tree, bands, x)
    bands_mod.save_index(index, args.out)
    _emit({"points": int(x.shape[0]), "bands": args.bands, "insertions": index.n_insertions})


def _cmd_query(args) -> None:
    from .engine import search

    tree = tree_mod.load_tree(args.tree)
    index = bands_mod.load_index(args.index)
    jd = load_model(args.model)
    queries = data_mod.read_sequences(args.queries)
    out = open(args.out, "w") if args.out else sys.stdout
    try:
        for qid in range(queries.shape[0]):
            res = search(index, tree, index.bands, queries[qid], jd,
                         delta=args.delta, query_id=qid)
            out.write(
                json.dumps(
                    {
                        "query": qid,
                        "hits": [[cid, ll] for cid, ll in res.hits],
                        "candidates_checked": res.candidates_checked,
                        "distinct_candidates": res.distinct_candidates,
                        "per_band_collisions": res.per_band_collisions,
                    }
                )
            )
            out.write("\n")
    finally:
        if args.out:
            out.close()


def _cmd_baseline(args) -> None:
    if args.method == "dubiner":
        est = baselines.dubiner_hamming_estimate_detail(
            args.p, args.n, args.s, n_trials=args.trials, seed=args.seed
        )
        _emit(dataclasses.asdict(est))
        return
    jd = load_model(args.model)
    if args.method == "minhash":
        _emit({"exponent": baselines.minhash_exponent(jd)})
    elif args.method == "lsh-hamming":
        _emit({"exponent": baselines.lsh_hamming_exponent(jd)})
    elif args.method == "mips-check":
        rng = np.random.default_rng(args.seed)
        flat = jd.p.ravel()
        idx = rng.choice(flat.size, size=args.s, p=flat)
        x, y = np.divmod(idx, jd.l)
        emb = baselines.MipsEmbedding.make(jd)
        dot = float(emb.embed_a(x) @ emb.embed_b(y))
        direct = float(np.sum(np.log(jd.p[x, y]) - np.log(jd.q[x, y])))
        _emit({"dot": dot, "direct": direct, "abs_error": abs(dot - direct)})
    elif args.method == "brute":
        x = data_mod.read_sequences(args.data)
        queries = data_mod.read_sequences(args.queries)
        results = []
        for qid in range(queries.shape[0]):
            res = baselines.brute_force(x, queries[qid], jd, delta=args.delta, query_id=qid)
            results.append({"query": qid, "hits": [[c, s] for c, s in res.hits]})
        _emit(results)
    else:
        raise ValidationError(f"unknown baseline method {args.method!r}")


def _cmd_gen(args) -> None:
    jd = load_model(args.model)
    ds = data_mod.generate_pairs(jd, args.n, args.m, args.s, args.seed)
    data_mod.write_sequences(args.out_x, ds.x)
    data_mod.write_sequences(args.out_y, ds.y)
    _emit({"n": args.n, "m": args.m, "s": args.s, "planted": len(ds.planted)})


def _cmd_ingest(args) -> None:
    ranks = data_mod.read_rank_lists(args.ranks)
    seqs = data_mod.logrank_transform(ranks, base=args.base, n_levels=args.levels)
    data_mod.write_sequences(args.out, seqs)
    _emit({"items": int(seqs.shape[0]), "positions": int(seqs.shape[1])})


def _cmd_bench(args) -> None:
    doc = _load_config(args.config)
    config = bench.ExperimentConfig(**doc)
    records = bench.run_experiment(config)
    _emit([dataclasses.asdict(r) for r in records])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="forest-dsh",
        description="Distribution-sensitive hashing for sublinear maximum-likelihood search",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    seed = _default_seed()

    p = sub.add_parser("solve-params", help="solve optimal hash-family exponents")
    p.add_argument("--model", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--s", type=int, default=1000)
    p.add_argument("--grid-max", type=float, default=20.0)
    p.add_argument("--grid-step", type=float, default=0.1)
    p.add_argument("--tol", type=float, default=0.01)
    p.set_defaults(func=_cmd_solve_params)

    p = sub.add_parser("build-tree", help="build the bucket decision tree")
    p.add_argument("--model", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--s", type=int, default=1000)
    p.add_argument("--c1", type=float, default=None)
    p.add_argument("--c2", type=float, default=None)
    p.add_argument("--c3", type=float, default=None)
    p.add_argument("--max-depth", type=int, default=None)
    p.add_argument("--max-nodes", type=int, default=tree_mod.DEFAULT_MAX_NODES)
    p.add_argument("--tp-target", type=float, default=0.9)
    p.add_argument("--grid-max", type=float, default=20.0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_build_tree)

    p = sub.add_parser("index", help="map data points to buckets across bands")
    p.add_argument("--tree", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--bands", type=int, required=True)
    p.add_argument("--seed", type=int, default=seed)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_index)

    p = sub.add_parser("query", help="search queries against a built index")
    p.add_argument("--index", required=True)
    p.add_argument("--tree", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--queries", required=True)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_query)

    p = sub.add_parser("baseline", help="run a reference method or diagnostic")
    p.add_argument("--method", required=True,
                   choices=["brute", "minhash", "lsh-hamming", "dubiner", "mips-check"])
    p.add_argument("--model", default=None)
    p.add_argument("--data", default=None)
    p.add_argument("--queries", default=None)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--p", type=float, default=0.9)
    p.add_argument("--n", type=int, default=100_000)
    p.add_argument("--s", type=int, default=1000)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=seed)
    p.set_defaults(func=_cmd_baseline)

    p = sub.add_parser("gen", help="generate planted-pair synthetic data")
    p.add_argument("--model", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--seed", type=int, default=seed)
    p.add_argument("--out-x", required=True)
    p.add_argument("--out-y", required=True)
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("ingest", help="compress ranked peak lists via the log-rank transform")
    p.add_argument("--ranks", required=True)
    p.add_argument("--base", type=int, default=4)
    p.add_argument("--levels", type=int, default=4)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("bench", help="run a configured experiment")
    p.add_argument("--config", required=True)
    p.set_defaults(func=_cmd_bench)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BudgetError as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return 3
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
