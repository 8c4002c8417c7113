"""Query execution: candidate enumeration via bucket collisions, then scoring.

For a query y, every A-point sharing a bucket with y in some band is a
positive.  Positives are counted with multiplicity (the work the index
actually performs) but each distinct candidate is scored exactly once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bands import BandIndex, BandSet, assign_b
from .errors import NoCandidate, ValidationError
from .model import JointDistribution, log_likelihood_many
from .tree import DecisionTree


@dataclass(frozen=True)
class SearchResult:
    """Hits above the probability threshold plus work counters."""

    query_id: int
    hits: list[tuple[int, float]]
    candidates_checked: int
    distinct_candidates: int
    per_band_collisions: list[int]


def collect_candidates(
    index: BandIndex, tree: DecisionTree, bands: BandSet, y
) -> tuple[list[int], int, list[int]]:
    """Distinct candidate ids, raw positive count, and per-band collision counts."""
    memberships = assign_b(tree, bands, y)
    seen: set[int] = set()
    raw = 0
    per_band: list[int] = []
    for z, buckets in enumerate(memberships):
        band_count = 0
        for bucket in buckets:
            pts = index.lookup(bucket, z)
            band_count += len(pts)
            seen.update(pts)
        per_band.append(band_count)
        raw += band_count
    return sorted(seen), raw, per_band


def search(
    index: BandIndex,
    tree: DecisionTree,
    bands: BandSet,
    y,
    jd: JointDistribution,
    delta: float = 0.0,
    query_id: int = 0,
) -> SearchResult:
    """Score every distinct candidate and keep those with Prob(y | x) > delta."""
    if not 0.0 <= delta < 1.0:
        raise ValidationError(f"delta must be in [0, 1), got {delta}")
    log_delta = math.log(delta) if delta > 0 else -math.inf
    candidates, raw, per_band = collect_candidates(index, tree, bands, y)
    hits: list[tuple[int, float]] = []
    if candidates:
        y_arr = np.asarray(y, dtype=np.intp)
        scores = log_likelihood_many(jd, index.x[candidates], y_arr)
        for cid, score in zip(candidates, scores.tolist()):
            if score > log_delta:
                hits.append((cid, score))
    hits.sort(key=lambda h: (-h[1], h[0]))
    return SearchResult(
        query_id=query_id,
        hits=hits,
        candidates_checked=raw,
        distinct_candidates=len(candidates),
        per_band_collisions=per_band,
    )


def search_top1(
    index: BandIndex,
    tree: DecisionTree,
    bands: BandSet,
    y,
    jd: JointDistribution,
) -> tuple[int, float]:
    """Highest-likelihood candidate; ties broken toward the smallest class id."""
    if index.n_points == 0:
        raise NoCandidate("index is empty")
    candidates, _raw, _per_band = collect_candidates(index, tree, bands, y)
    if not candidates:
        raise NoCandidate("no bucket collision produced a candidate")
    y_arr = np.asarray(y, dtype=np.intp)
    scores = log_likelihood_many(jd, index.x[candidates], y_arr)
    best = int(np.argmax(scores))
    return candidates[best], float(scores[best])
