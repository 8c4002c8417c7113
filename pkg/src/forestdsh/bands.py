"""Banded prefix-bucket assignment and the inverted index.

A band is one independently permuted copy of the shared decision tree.
A point belongs to every bucket whose side-specific prefix string matches
the permuted point; because one A-symbol can label several (a, b) children
of a node, membership is found by a multi-child frontier traversal rather
than a single root-to-leaf walk.
"""

from __future__ import annotations

import pickle
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import LengthMismatch
from .tree import DecisionTree, traverse_buckets


@dataclass(frozen=True)
class BandSet:
    """Per-band position permutations, deterministic in (seed, band index)."""

    n_bands: int
    s: int
    seed: int
    permutations: tuple = field(repr=False, default=None)

    @staticmethod
    def make(n_bands: int, s: int, seed: int) -> "BandSet":
        perms = []
        for z in range(n_bands):
            rng = np.random.default_rng((seed, z))
            perm = rng.permutation(s)
            perm.setflags(write=False)
            perms.append(perm)
        return BandSet(n_bands=n_bands, s=s, seed=seed, permutations=tuple(perms))


def _check_length(bands: BandSet, seq: np.ndarray) -> np.ndarray:
    seq = np.asarray(seq)
    if seq.ndim != 1 or seq.shape[0] != bands.s:
        raise LengthMismatch(f"sequence length {seq.shape} does not match S={bands.s}")
    return seq


def _assign_all(tree: DecisionTree, bands: BandSet, seq: np.ndarray, side_a: bool) -> list[list[int]]:
    nav = tree.nav_a() if side_a else tree.nav_b()
    root_status = tree.nodes[tree.root].status
    # Buckets never sit deeper than max_bucket_depth, so only that prefix of
    # each permutation matters; gathering it once keeps the per-step cost at
    # a dict lookup.
    limit = tree.max_bucket_depth
    return [
        traverse_buckets(nav, tree.root, root_status, seq[perm[:limit]].tolist())
        for perm in bands.permutations
    ]


def assign_a(tree: DecisionTree, bands: BandSet, x) -> list[list[int]]:
    """Per-band bucket memberships of an A-side (database) sequence."""
    return _assign_all(tree, bands, _check_length(bands, x), side_a=True)


def assign_b(tree: DecisionTree, bands: BandSet, y) -> list[list[int]]:
    """Per-band bucket memberships of a B-side (query) sequence."""
    return _assign_all(tree, bands, _check_length(bands, y), side_a=False)


@dataclass
class BandIndex:
    """Inverted index: per band, bucket id -> ids of A-points in that bucket.

    Keeps the indexed sequences so the query engine can score candidates.
    """

    bands: BandSet
    buckets: list[dict[int, list[int]]]
    x: np.ndarray
    n_insertions: int

    def lookup(self, bucket_id: int, band: int) -> list[int]:
        return self.buckets[band].get(bucket_id, [])

    @property
    def n_points(self) -> int:
        return self.x.shape[0]


def build_index(tree: DecisionTree, bands: BandSet, x) -> BandIndex:
    """Insert every A-sequence into its buckets in every band."""
    x = np.asarray(x)
    if x.size == 0:
        x = x.reshape(0, bands.s)
    if x.ndim != 2:
        raise LengthMismatch(f"expected a 2-D array of sequences, got shape {x.shape}")
    if x.shape[1] != bands.s:
        raise LengthMismatch(f"sequence length {x.shape[1]} does not match S={bands.s}")
    nav = tree.nav_a()
    root_status = tree.nodes[tree.root].status
    limit = tree.max_bucket_depth
    per_band: list[dict[int, list[int]]] = [{} for _ in range(bands.n_bands)]
    n_insertions = 0
    for z, perm in enumerate(bands.permutations):
        table = per_band[z]
        xp = x[:, perm[:limit]]
        for pid in range(x.shape[0]):
            for bucket in traverse_buckets(nav, tree.root, root_status, xp[pid].tolist()):
                table.setdefault(bucket, []).append(pid)
                n_insertions += 1
    return BandIndex(bands=bands, buckets=per_band, x=x, n_insertions=n_insertions)


def save_index(index: BandIndex, path: str | Path) -> None:
    with open(path, "wb") as fh:
        pickle.dump(
            {
                "n_bands": index.bands.n_bands,
                "s": index.bands.s,
                "seed": index.bands.seed,
                "buckets": index.buckets,
                "x": index.x,
                "n_insertions": index.n_insertions,
            },
            fh,
        )


def load_index(path: str | Path) -> BandIndex:
    with open(path, "rb") as fh:
        doc = pickle.load(fh)
    bands = BandSet.make(doc["n_bands"], doc["s"], doc["seed"])
    return BandIndex(
        bands=bands, buckets=doc["buckets"], x=doc["x"], n_insertions=doc["n_insertions"]
    )
