"""Joint distribution over paired discrete sequences.

A problem instance is a k x l matrix ``p`` of joint symbol probabilities
with marginals ``pa`` (side A, the database side) and ``pb`` (side B, the
query side), and the independence product ``q[i, j] = pa[i] * pb[j]``.
Paired sequences factorize i.i.d. across positions, so every likelihood
is a sum of per-position log factors.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence as Seq

import numpy as np

from .errors import (
    EmptyAlphabet,
    EmptyTrainingSet,
    LengthMismatch,
    NotADistribution,
    SymbolOutOfAlphabet,
    ValidationError,
)

SUM_TOLERANCE = 1e-6
DERIVED_TOLERANCE = 1e-9


@dataclass(frozen=True)
class Alphabet:
    """Ordered set of distinct discrete symbols; index i <-> symbol."""

    symbols: tuple

    def __post_init__(self) -> None:
        if len(self.symbols) == 0:
            raise EmptyAlphabet("alphabet must contain at least one symbol")
        if len(set(self.symbols)) != len(self.symbols):
            raise ValidationError(f"alphabet symbols must be unique, got {self.symbols!r}")

    @property
    def size(self) -> int:
        return len(self.symbols)

    def index(self, symbol) -> int:
        try:
            return self.symbols.index(symbol)
        except ValueError:
            raise SymbolOutOfAlphabet(f"symbol {symbol!r} not in alphabet") from None


def _default_alphabets(k: int, l: int) -> tuple[Alphabet, Alphabet]:
    return Alphabet(tuple(range(k))), Alphabet(tuple(range(l)))


@dataclass(frozen=True)
class JointDistribution:
    """Validated joint distribution with derived marginals and log tables.

    Immutable after construction; safe to share across threads. Build via
    :func:`from_matrix` rather than directly.
    """

    p: np.ndarray
    pa: np.ndarray
    pb: np.ndarray
    q: np.ndarray
    alphabet_a: Alphabet
    alphabet_b: Alphabet
    logp: np.ndarray = field(repr=False, default=None)
    logpa: np.ndarray = field(repr=False, default=None)
    logpb: np.ndarray = field(repr=False, default=None)

    @property
    def k(self) -> int:
        return self.p.shape[0]

    @property
    def l(self) -> int:
        return self.p.shape[1]

    def nonzero_cells(self) -> np.ndarray:
        """Boolean mask of cells with p[i, j] > 0."""
        return self.p > 0


def from_matrix(p, alphabets: tuple[Alphabet, Alphabet] | None = None) -> JointDistribution:
    """Validate a non-negative matrix and derive marginals and products.

    The matrix is renormalized by its sum when the sum deviates from 1 by
    less than ``SUM_TOLERANCE``; larger deviations are rejected.
    """
    p = np.asarray(p, dtype=float)
    if p.ndim != 2 or p.size == 0:
        raise EmptyAlphabet(f"matrix must be 2-D and non-empty, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise NotADistribution("matrix entries must be finite")
    if np.any(p < 0):
        raise NotADistribution("matrix entries must be non-negative")
    total = p.sum()
    if abs(total - 1.0) >= SUM_TOLERANCE:
        raise NotADistribution(f"matrix sums to {total!r}, not 1 within {SUM_TOLERANCE}")
    p = p / total

    k, l = p.shape
    if alphabets is None:
        alpha_a, alpha_b = _default_alphabets(k, l)
    else:
        alpha_a, alpha_b = alphabets
    if alpha_a.size != k or alpha_b.size != l:
        raise EmptyAlphabet(
            f"alphabet sizes ({alpha_a.size}, {alpha_b.size}) do not match matrix shape {p.shape}"
        )

    pa = p.sum(axis=1)
    pb = p.sum(axis=0)
    q = np.outer(pa, pb)
    with np.errstate(divide="ignore"):
        logp = np.log(p)
        logpa = np.log(pa)
        logpb = np.log(pb)
    jd = JointDistribution(
        p=p, pa=pa, pb=pb, q=q,
        alphabet_a=alpha_a, alphabet_b=alpha_b,
        logp=logp, logpa=logpa, logpb=logpb,
    )
    for arr in (jd.p, jd.pa, jd.pb, jd.q, jd.logp, jd.logpa, jd.logpb):
        arr.setflags(write=False)
    return jd


@dataclass(frozen=True)
class ProblemDims:
    """Problem size: N database classes, M queries, sequence length S."""

    n: int
    m: int
    s: int

    def __post_init__(self) -> None:
        if self.n < 2 or self.m < 1 or self.s < 1:
            raise ValidationError(f"need N >= 2, M >= 1, S >= 1, got {self}")

    @property
    def delta(self) -> float:
        """Query-to-class size exponent log M / log N, never stored."""
        return math.log(self.m) / math.log(self.n)


def _check_sequences(jd: JointDistribution, x, y) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.intp)
    y = np.asarray(y, dtype=np.intp)
    if x.shape != y.shape or x.ndim != 1:
        raise LengthMismatch(f"sequence lengths differ: {x.shape} vs {y.shape}")
    if x.size and (x.min() < 0 or x.max() >= jd.k):
        raise SymbolOutOfAlphabet("A-sequence contains an out-of-range symbol index")
    if y.size and (y.min() < 0 or y.max() >= jd.l):
        raise SymbolOutOfAlphabet("B-sequence contains an out-of-range symbol index")
    return x, y


def log_likelihood(jd: JointDistribution, x, y) -> float:
    """log Prob(y | x) = sum_s log(p[x_s, y_s] / pa[x_s]), -inf on any zero factor."""
    x, y = _check_sequences(jd, x, y)
    return float(np.sum(jd.logp[x, y]) - np.sum(jd.logpa[x]))


def log_likelihood_many(jd: JointDistribution, xs: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Vectorized log Prob(y | x) for a stack of A-sequences against one query."""
    xs = np.asarray(xs, dtype=np.intp)
    y = np.asarray(y, dtype=np.intp)
    if xs.ndim == 1:
        xs = xs[None, :]
    if xs.shape[1] != y.shape[0]:
        raise LengthMismatch(f"sequence lengths differ: {xs.shape[1]} vs {y.shape[0]}")
    return (jd.logp[xs, y[None, :]] - jd.logpa[xs]).sum(axis=1)


def estimate_from_pairs(
    pairs: Seq[tuple], alphabets: tuple[Alphabet, Alphabet], smoothing: float = 0.0
) -> JointDistribution:
    """Estimate the joint matrix from per-position counts over paired sequences."""
    if not pairs:
        raise EmptyTrainingSet("no training pairs supplied")
    alpha_a, alpha_b = alphabets
    counts = np.full((alpha_a.size, alpha_b.size), float(smoothing))
    for x, y in pairs:
        x = np.asarray(x, dtype=np.intp)
        y = np.asarray(y, dtype=np.intp)
        if x.shape != y.shape:
            raise LengthMismatch("paired sequences have different lengths")
        if x.size and (x.min() < 0 or x.max() >= alpha_a.size):
            raise SymbolOutOfAlphabet("A-sequence symbol index out of range")
        if y.size and (y.min() < 0 or y.max() >= alpha_b.size):
            raise SymbolOutOfAlphabet("B-sequence symbol index out of range")
        np.add.at(counts, (x, y), 1.0)
    total = counts.sum()
    if total <= 0:
        raise EmptyTrainingSet("training pairs contain no positions")
    return from_matrix(counts / total, alphabets)


# --- model file IO ----------------------------------------------------------

def load_model(path: str | Path) -> JointDistribution:
    """Read a JSON model file {"alphabet_a": [...], "alphabet_b": [...], "p": [[...]]}."""
    with open(path) as fh:
        doc = json.load(fh)
    alpha_a = Alphabet(tuple(doc["alphabet_a"]))
    alpha_b = Alphabet(tuple(doc["alphabet_b"]))
    return from_matrix(np.asarray(doc["p"], dtype=float), (alpha_a, alpha_b))


def dump_model(jd: JointDistribution, path: str | Path) -> None:
    """Write the JSON model file format read by :func:`load_model`."""
    doc = {
        "alphabet_a": list(jd.alphabet_a.symbols),
        "alphabet_b": list(jd.alphabet_b.symbols),
        "p": jd.p.tolist(),
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
