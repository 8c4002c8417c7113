"""Synthetic data generation and ingestion helpers.

Generates planted-pair datasets from a joint distribution, interpolates
and perturbs distributions for sweep experiments, and compresses ranked
peak lists into a small alphabet via the logarithmic rank transform.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidRank, NotADistribution, PerturbationInfeasible
from .model import Alphabet, JointDistribution, from_matrix

PERTURB_MAX_ATTEMPTS = 100


@dataclass(frozen=True)
class PairedDataset:
    """N database sequences, M query sequences, and the planted true pairs.

    The first min(N, M) rows of X and Y are drawn jointly position-wise;
    every cross pair is independent by construction.  Regeneration from
    the same (seed, distribution, sizes) is byte-identical.
    """

    x: np.ndarray
    y: np.ndarray
    planted: tuple[tuple[int, int], ...]
    seed: int


def generate_pairs(jd: JointDistribution, n: int, m: int, s: int, seed: int) -> PairedDataset:
    """Sample min(n, m) true pairs from the joint law and fill the rest from marginals."""
    rng = np.random.default_rng(seed)
    n_pairs = min(n, m)
    flat = jd.p.ravel()
    # int16 symbols keep large (N x S) datasets affordable; joint draws are
    # chunked so the transient int64 sample array stays small.
    x = np.empty((n, s), dtype=np.int16)
    y = np.empty((m, s), dtype=np.int16)
    chunk = max(1, 8_000_000 // max(s, 1))
    for lo in range(0, n_pairs, chunk):
        hi = min(lo + chunk, n_pairs)
        pair_idx = rng.choice(flat.size, size=(hi - lo, s), p=flat)
        xa, yb = np.divmod(pair_idx, jd.l)
        x[lo:hi] = xa
        y[lo:hi] = yb
    if n > n_pairs:
        x[n_pairs:] = rng.choice(jd.k, size=(n - n_pairs, s), p=jd.pa)
    if m > n_pairs:
        y[n_pairs:] = rng.choice(jd.l, size=(m - n_pairs, s), p=jd.pb)
    x.setflags(write=False)
    y.setflags(write=False)
    return PairedDataset(
        x=x, y=y, planted=tuple((i, i) for i in range(n_pairs)), seed=seed
    )


def interpolate(p1: JointDistribution, p2: JointDistribution, t: float) -> JointDistribution:
    """Convex combination (1 - t) * P1 + t * P2, revalidated."""
    if p1.p.shape != p2.p.shape:
        raise NotADistribution("distributions must have the same shape")
    if not 0.0 <= t <= 1.0:
        raise NotADistribution(f"t must be in [0, 1], got {t}")
    return from_matrix((1.0 - t) * p1.p + t * p2.p, (p1.alphabet_a, p1.alphabet_b))


def perturb(jd: JointDistribution, epsilon: float, seed: int) -> JointDistribution:
    """Random multiplicative perturbation keeping every nonzero cell within
    [p / (1 + eps), p * (1 + eps)] after renormalization."""
    if epsilon <= 0:
        raise PerturbationInfeasible(f"epsilon must be positive, got {epsilon}")
    rng = np.random.default_rng(seed)
    mask = jd.nonzero_cells()
    lo = jd.p / (1.0 + epsilon)
    hi = jd.p * (1.0 + epsilon)
    for _ in range(PERTURB_MAX_ATTEMPTS):
        factors = rng.uniform(1.0 / (1.0 + epsilon), 1.0 + epsilon, size=jd.p.shape)
        cand = np.where(mask, jd.p * factors, 0.0)
        cand = cand / cand.sum()
        if np.all(cand[mask] >= lo[mask]) and np.all(cand[mask] <= hi[mask]):
            return from_matrix(cand, (jd.alphabet_a, jd.alphabet_b))
    raise PerturbationInfeasible(
        f"could not stay inside the {epsilon}-band after {PERTURB_MAX_ATTEMPTS} attempts"
    )


def logrank_transform(rank_lists, base: int = 4, n_levels: int = 4) -> np.ndarray:
    """Compress per-position peak ranks into levels floor(log_base(rank)) + 1.

    Levels are clamped to ``n_levels``; positions with no peak (encoded as
    None or a non-positive placeholder missing from the list) map to the
    reserved top "absent" level ``n_levels``.  Output levels are 0-based
    symbol indices (level 1 -> index 0).
    """
    if base < 2:
        raise InvalidRank(f"base must be >= 2, got {base}")
    out = []
    for ranks in rank_lists:
        row = []
        for r in ranks:
            if r is None:
                row.append(n_levels - 1)
                continue
            r = int(r)
            if r < 1:
                raise InvalidRank(f"ranks must be >= 1, got {r}")
            level = 1
            boundary = base
            while r >= boundary and level < n_levels:
                level += 1
                boundary *= base
            row.append(level - 1)
        out.append(row)
    return np.asarray(out, dtype=np.intp)


# --- text file formats -------------------------------------------------------

def write_sequences(path: str | Path, seqs: np.ndarray) -> None:
    """One sequence per line, symbols as space-separated integers."""
    with open(path, "w") as fh:
        for row in np.asarray(seqs, dtype=np.intp):
            fh.write(" ".join(map(str, row.tolist())))
            fh.write("\n")


def read_sequences(path: str | Path) -> np.ndarray:
    with open(path) as fh:
        rows = [[int(tok) for tok in line.split()] for line in fh if line.strip()]
    return np.asarray(rows, dtype=np.intp)


def read_rank_lists(path: str | Path) -> list[list[int]]:
    """One item per line, comma-separated peak ranks; blank fields mean absent."""
    out = []
    with open(path) as fh:
        for line in fh:
            if not line.strip():
                continue
            fields = [tok.strip() for tok in line.strip().split(",")]
            out.append([int(tok) if tok else None for tok in fields])
    return out
