"""End-to-end experiment orchestration.

Every experiment is a pure function of its config (seeds included), and
emits machine-readable rows; wall time is recorded but conclusions rest
on hardware-independent work counters (tree nodes, insertions, raw
positives).
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from .bands import BandSet, build_index
from .data import generate_pairs
from .engine import collect_candidates
from .errors import AllBuildsFailed, EmptyBucketSet, ForestDSHError, NodeBudgetExceeded
from .model import JointDistribution, ProblemDims
from .solver import HashParams, solve_params
from .tree import DecisionTree, build_tree, complexity_report, family_stats


@dataclass
class ExperimentConfig:
    """Fully serializable description of one experiment run."""

    kind: str  # "recall-curve" | "scaling" | "bands-sweep"
    model_path: str | None = None
    n: int = 1000
    m: int = 1000
    s: int = 1000
    tp_target: float = 0.9
    delta_threshold: float = 0.0
    c1: float | None = None
    c2: float | None = None
    c3: float | None = None
    seed: int = 0
    n_values: list[int] = field(default_factory=list)
    band_counts: list[int] = field(default_factory=list)
    cost_model: tuple[float, float, float, float] = (1.0, 1.0, 1.0, 1.0)
    out_dir: str | None = None
    grid_max: float = 20.0


@dataclass
class MetricsRecord:
    """One measured pipeline run."""

    method: str
    n: int
    m: int
    s: int
    n_bands: int
    recall: float
    predicted_tp: float
    raw_positives: int
    distinct_candidates: int
    insertions: int
    tree_nodes: int
    alpha: float
    beta: float
    gamma_a: float
    gamma_b: float
    lam: float
    wall_time_s: float


def measure_recall_and_work(
    tree: DecisionTree,
    jd: JointDistribution,
    dims: ProblemDims,
    n_bands: int,
    seed: int,
    n_queries: int | None = None,
    data_jd: JointDistribution | None = None,
) -> MetricsRecord:
    """Generate planted data, index it, and run every query through the bands.

    Recall counts a planted pair as recovered when the partner appears
    among the query's distinct candidates (threshold 0).  ``data_jd``
    overrides the generating distribution for model-mismatch experiments
    (the tree and its statistics still come from the nominal model).
    """
    t0 = time.perf_counter()
    stats = family_stats(tree, 0.5)  # band count supplied explicitly below
    data = generate_pairs(data_jd or jd, dims.n, dims.m, dims.s, seed)
    bands = BandSet.make(n_bands, dims.s, seed + 1)
    index = build_index(tree, bands, data.x)
    m_run = dims.m if n_queries is None else min(n_queries, dims.m)
    recalled = 0
    raw_total = 0
    distinct_total = 0
    planted_partner = {qi: xi for xi, qi in data.planted}
    for qid in range(m_run):
        cands, raw, _per_band = collect_candidates(index, tree, bands, data.y[qid])
        raw_total += raw
        distinct_total += len(cands)
        partner = planted_partner.get(qid)
        if partner is not None and partner in cands:
            recalled += 1
    n_planted = sum(1 for q in range(m_run) if q in planted_partner)
    return MetricsRecord(
        method="forest-dsh",
        n=dims.n,
        m=m_run,
        s=dims.s,
        n_bands=n_bands,
        recall=recalled / max(n_planted, 1),
        predicted_tp=1.0 - (1.0 - stats.alpha) ** n_bands,
        raw_positives=raw_total,
        distinct_candidates=distinct_total,
        insertions=index.n_insertions,
        tree_nodes=len(tree.nodes),
        alpha=stats.alpha,
        beta=stats.beta,
        gamma_a=stats.gamma_a,
        gamma_b=stats.gamma_b,
        lam=tree.lam,
        wall_time_s=time.perf_counter() - t0,
    )


def scaling_sweep(
    jd: JointDistribution,
    params: HashParams,
    n_values: list[int],
    s: int,
    c1: float,
    c2: float,
    c3: float,
) -> tuple[list[dict], dict[str, float]]:
    """Tree-size and bucket-sum growth against N, with fitted log-log slopes.

    Returns per-N rows (N, |V|, alpha/beta, alpha/gamma_a, alpha/gamma_b)
    and the slopes of their logs against log N.
    """
    rows = []
    for n in n_values:
        dims = ProblemDims(n=n, m=n, s=s)
        tree = build_tree(jd, params, dims, c1=c1, c2=c2, c3=c3)
        st = family_stats(tree, 0.9)
        rows.append(
            {
                "n": n,
                "nodes": len(tree.nodes),
                "alpha_over_beta": st.alpha / st.beta,
                "alpha_over_gamma_a": st.alpha / st.gamma_a,
                "alpha_over_gamma_b": st.alpha / st.gamma_b,
            }
        )
    log_n = np.log([r["n"] for r in rows])
    slopes = {}
    for key in ("nodes", "alpha_over_beta", "alpha_over_gamma_a", "alpha_over_gamma_b"):
        slopes[key] = float(np.polyfit(log_n, np.log([r[key] for r in rows]), 1)[0])
    return rows, slopes


def threshold_sweep(
    jd: JointDistribution,
    params: HashParams,
    dims: ProblemDims,
    grid: list[tuple[float, float, float]],
    tp_target: float,
    cost_model: tuple[float, float, float, float] = (1.0, 1.0, 1.0, 1.0),
) -> tuple[tuple[float, float, float], list[dict]]:
    """Build one tree per threshold triple and rank them by predicted cost.

    Returns the best triple (ties broken toward larger C1, i.e. the
    smaller tree) and the full table; grid points that fail to build are
    recorded and skipped.
    """
    if not grid:
        raise AllBuildsFailed("empty threshold grid")
    table = []
    best: tuple[float, float, tuple[float, float, float]] | None = None
    for c1, c2, c3 in grid:
        row: dict = {"c1": c1, "c2": c2, "c3": c3}
        try:
            tree = build_tree(jd, params, dims, c1=c1, c2=c2, c3=c3)
            stats = family_stats(tree, tp_target)
            cost = complexity_report(tree, stats, dims, cost_model)
            row.update(
                nodes=len(tree.nodes),
                n_buckets=len(tree.buckets),
                alpha=stats.alpha,
                n_bands=stats.n_bands,
                predicted_cost=cost,
            )
            key = (cost, -c1)
            if best is None or key < (best[0], -best[2][0]):
                best = (cost, -c1, (c1, c2, c3))
        except (EmptyBucketSet, NodeBudgetExceeded) as exc:
            row["error"] = type(exc).__name__
        table.append(row)
    if best is None:
        raise AllBuildsFailed("every threshold grid point failed to build a usable tree")
    return best[2], table


def run_experiment(config: ExperimentConfig) -> list[MetricsRecord]:
    """Dispatch on ``config.kind``; write CSV/JSON artifacts when out_dir is set."""
    out_dir = Path(config.out_dir) if config.out_dir else None
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)

    records: list[MetricsRecord] = []
    rows_out: list[dict] = []
    if config.kind == "recall-curve":
        jd, params, dims, tree = _solve_and_build(config)
        stats = family_stats(tree, config.tp_target)
        band_counts = config.band_counts or sorted(
            {1, max(1, stats.n_bands // 2), stats.n_bands}
        )
        for nb in band_counts:
            rec = measure_recall_and_work(tree, jd, dims, nb, config.seed)
            records.append(rec)
            rows_out.append(asdict(rec))
    elif config.kind == "bands-sweep":
        jd, params, dims, tree = _solve_and_build(config)
        stats = family_stats(tree, config.tp_target)
        band_counts = config.band_counts or [
            max(1, round(stats.n_bands * f)) for f in (0.25, 0.5, 1.0, 1.5, 2.0)
        ]
        for nb in sorted(set(band_counts)):
            rec = measure_recall_and_work(tree, jd, dims, nb, config.seed)
            records.append(rec)
            rows_out.append(asdict(rec))
    elif config.kind == "scaling":
        jd, params, dims, _tree = _solve_and_build(config)
        n_values = config.n_values or [128, 256, 512, 1024, 2048, 4096]
        c1 = config.c1 if config.c1 is not None else params.p0 * params.q0
        c2 = config.c2 if config.c2 is not None else c1
        c3 = config.c3 if config.c3 is not None else c1
        rows, slopes = scaling_sweep(jd, params, n_values, config.s, c1, c2, c3)
        rows_out = rows
        if out_dir:
            with open(out_dir / "slopes.json", "w") as fh:
                json.dump(slopes, fh, indent=2)
    else:
        raise ForestDSHError(f"unknown experiment kind {config.kind!r}")

    if out_dir and rows_out:
        keys = sorted({k for r in rows_out for k in r})
        with open(out_dir / f"{config.kind}.csv", "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=keys)
            writer.writeheader()
            writer.writerows(rows_out)
    return records


def _solve_and_build(config: ExperimentConfig):
    from .model import load_model

    if not config.model_path:
        raise ForestDSHError("config.model_path must point to a JSON model file")
    jd = load_model(config.model_path)
    dims = ProblemDims(n=config.n, m=config.m, s=config.s)
    params = solve_params(jd, dims, grid_max=config.grid_max)
    tree = build_tree(jd, params, dims, c1=config.c1, c2=config.c2, c3=config.c3)
    return jd, params, dims, tree
