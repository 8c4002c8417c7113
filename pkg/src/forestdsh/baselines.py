"""Reference competitors and diagnostics.

Includes the exact brute-force scan (the recall oracle), closed-form 2x2
complexity exponents for MinHash and hamming LSH, a banded signature
search with automatic (rows, bands) tuning, a Monte-Carlo estimator of
the bucketing-tree exponent for symmetric hamming distributions, and the
inner-product embedding whose dot product recovers the joint-to-product
log ratio.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import binom

from .engine import SearchResult
from .errors import (
    NoFeasibleRadius,
    SymbolOutOfAlphabet,
    TuningFailed,
    UndefinedRatio,
    ValidationError,
)
from .model import JointDistribution, log_likelihood_many


def brute_force(x, y, jd: JointDistribution, delta: float = 0.0, query_id: int = 0) -> SearchResult:
    """Exact scan of every class; ground-truth oracle for recall measurements."""
    if not 0.0 <= delta <= 1.0:
        raise ValidationError(f"delta must be in [0, 1], got {delta}")
    x = np.asarray(x, dtype=np.intp)
    y = np.asarray(y, dtype=np.intp)
    hits: list[tuple[int, float]] = []
    if delta < 1.0 and x.shape[0] > 0:
        log_delta = math.log(delta) if delta > 0 else -math.inf
        scores = log_likelihood_many(jd, x, y)
        for cid, score in enumerate(scores.tolist()):
            if score > log_delta:
                hits.append((cid, score))
    hits.sort(key=lambda h: (-h[1], h[0]))
    return SearchResult(
        query_id=query_id,
        hits=hits,
        candidates_checked=x.shape[0],
        distinct_candidates=x.shape[0],
        per_band_collisions=[],
    )


# --- closed-form exponents ---------------------------------------------------

def _require_2x2(jd: JointDistribution) -> None:
    if jd.p.shape != (2, 2):
        raise UndefinedRatio(f"closed-form exponents require a 2x2 matrix, got {jd.p.shape}")


def _log_ratio(p_num: float, p_den: float, q_num: float, q_den: float) -> float | None:
    """log(p_num/p_den) / log(q_num/q_den); None when the p-argument vanishes."""
    if p_num <= 0.0:
        return None
    pr = p_num / p_den
    qr = q_num / q_den
    if not (0.0 < pr < 1.0) or not (0.0 < qr < 1.0):
        raise UndefinedRatio(f"ratio arguments must lie in (0, 1), got {pr}, {qr}")
    return math.log(pr) / math.log(qr)


def minhash_exponent(jd: JointDistribution) -> float:
    """Query-complexity exponent of banded MinHash on a 2x2 distribution.

    Minimum of the four symbol-as-present-set variants; variants whose
    joint cell is empty cannot be realized and are skipped.
    """
    _require_2x2(jd)
    p, q = jd.p, jd.q
    ratios = [
        _log_ratio(p[0, 0], 1.0 - p[1, 1], q[0, 0], 1.0 - q[1, 1]),
        _log_ratio(p[0, 1], 1.0 - p[1, 0], q[0, 1], 1.0 - q[1, 0]),
        _log_ratio(p[1, 0], 1.0 - p[0, 1], q[1, 0], 1.0 - q[0, 1]),
        _log_ratio(p[1, 1], 1.0 - p[0, 0], q[1, 1], 1.0 - q[0, 0]),
    ]
    valid = [r for r in ratios if r is not None]
    if not valid:
        raise UndefinedRatio("no MinHash variant is realizable for this matrix")
    return min(valid)


def lsh_hamming_exponent(jd: JointDistribution) -> float:
    """Query-complexity exponent of banded hamming LSH on a 2x2 distribution."""
    _require_2x2(jd)
    p, q = jd.p, jd.q
    agree = _log_ratio(p[0, 0] + p[1, 1], 1.0, q[0, 0] + q[1, 1], 1.0)
    disagree = _log_ratio(p[0, 1] + p[1, 0], 1.0, q[0, 1] + q[1, 0], 1.0)
    valid = [r for r in (agree, disagree) if r is not None]
    if not valid:
        raise UndefinedRatio("both agreement masses vanish")
    return min(valid)


# --- banded signature search ---------------------------------------------------

@dataclass(frozen=True)
class BandedSignatureScheme:
    """Classical banded hashing: a pair is recalled iff all rows of some band agree.

    For MinHash, each side is reduced to the set of positions carrying a
    designated "present" symbol; ``present`` is an (A-symbol, B-symbol)
    index pair, or None to pick the best-performing pair during tuning.
    """

    kind: str  # "minhash" | "lsh-hamming"
    seed: int = 0
    present: tuple[int, int] | None = None
    max_rows: int = 100
    max_bands: int = 4000


@dataclass(frozen=True)
class SignatureSearchReport:
    n_rows: int
    n_bands: int
    present: tuple[int, int] | None
    recall: float
    total_candidates: int
    insertions: int
    work: int
    mean_candidates_per_query: float


class _MinhashSide:
    """Padded flat position-set representation enabling fast per-row minima.

    Every point's set gets one trailing sentinel position so empty sets
    produce a sentinel signature (empty sets collide with each other).
    """

    def __init__(self, seqs: np.ndarray, symbol: int, s: int):
        mask = seqs == symbol
        n = seqs.shape[0]
        counts = mask.sum(axis=1) + 1
        flat = np.empty(int(counts.sum()), dtype=np.intp)
        starts = np.zeros(n, dtype=np.intp)
        np.cumsum(counts[:-1], out=starts[1:])
        pos = 0
        cols = np.nonzero(mask)
        # Group positions by point; nonzero already yields row-major order.
        rows_idx, cols_idx = cols
        bounds = np.searchsorted(rows_idx, np.arange(n + 1))
        for pid in range(n):
            seg = cols_idx[bounds[pid]:bounds[pid + 1]]
            flat[pos:pos + len(seg)] = seg
            flat[pos + len(seg)] = s  # sentinel slot
            pos += len(seg) + 1
        self.flat = flat
        self.starts = starts
        self.s = s

    def row_signature(self, perm: np.ndarray) -> np.ndarray:
        ext = np.empty(self.s + 1, dtype=np.int64)
        ext[: self.s] = perm
        ext[self.s] = self.s + 1  # sentinel hash, larger than any real value
        return np.minimum.reduceat(ext[self.flat], self.starts)


def _band_signatures(
    kind: str,
    rng: np.random.Generator,
    n_rows: int,
    s: int,
    side_a,
    side_b,
) -> tuple[np.ndarray, np.ndarray]:
    """(n_points, n_rows) signatures for both sides sharing the row hashes."""
    if kind == "lsh-hamming":
        positions = rng.integers(0, s, size=n_rows)
        return side_a[:, positions], side_b[:, positions]
    cols_a, cols_b = [], []
    for _ in range(n_rows):
        perm = rng.permutation(s)
        cols_a.append(side_a.row_signature(perm))
        cols_b.append(side_b.row_signature(perm))
    return np.stack(cols_a, axis=1), np.stack(cols_b, axis=1)


def _collision_probs(sig_x, sig_y, planted: int, rng: np.random.Generator) -> tuple[float, float]:
    """Per-row collision frequency for planted pairs and for mismatched pairs."""
    p_true = float((sig_x[:planted] == sig_y[:planted]).mean())
    shift = 1 + int(rng.integers(0, planted - 1))
    rolled = np.roll(np.arange(planted), shift)
    p_false = float((sig_x[:planted] == sig_y[:planted][rolled]).mean())
    return p_true, p_false


def banded_signature_search(
    scheme: BandedSignatureScheme,
    x: np.ndarray,
    y: np.ndarray,
    planted: int,
    tp_target: float,
) -> SignatureSearchReport:
    """Tune (rows, bands) for the recall target, then measure recall and work.

    The first ``planted`` rows of ``x`` and ``y`` are true pairs (used both
    for tuning and for the recall measurement).  ``work`` counts one unit
    per point inserted or query hashed per band plus one per raw candidate,
    so row count and band count carry their real cost; tuning minimizes
    predicted work subject to the recall target and the band budget.
    """
    x = np.asarray(x, dtype=np.intp)
    y = np.asarray(y, dtype=np.intp)
    s = x.shape[1]
    n, m = x.shape[0], y.shape[0]
    rng = np.random.default_rng(scheme.seed)
    calib_rows = 64

    if scheme.kind == "lsh-hamming":
        variants = [(None, x, y)]
    elif scheme.kind == "minhash":
        if scheme.present is not None:
            pairs = [scheme.present]
        else:
            pairs = [(i, j) for i in range(int(x.max()) + 1) for j in range(int(y.max()) + 1)]
        variants = [(pr, _MinhashSide(x, pr[0], s), _MinhashSide(y, pr[1], s)) for pr in pairs]
    else:
        raise ValidationError(f"unknown scheme kind {scheme.kind!r}")

    need = math.log(1.0 / (1.0 - tp_target))
    best: tuple[float, int, int, object] | None = None
    for present, side_a, side_b in variants:
        sig_x, sig_y = _band_signatures(scheme.kind, rng, calib_rows, s, side_a, side_b)
        p_true, p_false = _collision_probs(sig_x, sig_y, planted, rng)
        if p_true <= 0.0 or p_true >= 1.0:
            continue
        for rows in range(1, scheme.max_rows + 1):
            p_band = p_true**rows
            # The 1.2 safety factor absorbs calibration noise in p_true so
            # the measured recall lands at (not just near) the target.
            bands = max(1, math.ceil(1.2 * need / p_band))
            if bands > scheme.max_bands:
                break
            work = bands * (n + m + m * n * (p_false**rows))
            if best is None or work < best[0]:
                best = (work, rows, bands, (present, side_a, side_b))
    if best is None:
        raise TuningFailed(f"no (rows, bands) within budget reaches tp_target={tp_target}")
    _, n_rows, n_bands, (present, side_a, side_b) = best

    recalled = np.zeros(planted, dtype=bool)
    total_candidates = 0
    for _z in range(n_bands):
        sig_x, sig_y = _band_signatures(scheme.kind, rng, n_rows, s, side_a, side_b)
        table: dict[tuple, list[int]] = {}
        for pid in range(n):
            table.setdefault(tuple(sig_x[pid].tolist()), []).append(pid)
        for qid in range(m):
            bucket = table.get(tuple(sig_y[qid].tolist()))
            if bucket:
                total_candidates += len(bucket)
                if qid < planted and not recalled[qid] and qid in bucket:
                    recalled[qid] = True
    insertions = n_bands * (n + m)
    return SignatureSearchReport(
        n_rows=n_rows,
        n_bands=n_bands,
        present=present,
        recall=float(recalled.mean()),
        total_candidates=total_candidates,
        insertions=insertions,
        work=insertions + total_candidates,
        mean_candidates_per_query=total_candidates / m,
    )


# --- hamming bucketing-tree exponent estimator --------------------------------

@dataclass(frozen=True)
class DubinerEstimate:
    exponent: float
    stderr: float
    d0: int
    p1_d0: float
    p2_d0: float


def dubiner_hamming_estimate_detail(
    p: float, n: int, s: int, n_trials: int = 100_000, seed: int = 0
) -> DubinerEstimate:
    """Exponent estimate log P2(d0) / log P1(d0) with d0 chosen so P1(d0) ~ 1/N.

    P1(d) is the chance a uniform random point lands within hamming
    distance d of a uniform random center — exactly the Binomial(S, 1/2)
    CDF, which we evaluate in closed form.  P2(d) is the chance both halves
    of a correlated pair (per-position agreement probability ``p``) land
    within d of the center; it is estimated by sampling only the pair's
    disagreement split per trial and averaging the exact conditional
    probability, which keeps the estimator usable at values far below 1/N.
    """
    if not 0.5 <= p <= 1.0:
        raise ValidationError(f"agreement probability must be in [0.5, 1], got {p}")
    # Smallest d0 with P1(d0) >= 1/N, accepted if it does not overshoot 2/N.
    ds = np.arange(0, s + 1)
    p1 = binom.cdf(ds, s, 0.5)
    feasible = np.nonzero(p1 >= 1.0 / n)[0]
    if feasible.size == 0:
        raise NoFeasibleRadius(f"no radius reaches hit rate 1/N for S={s}")
    d0 = int(feasible[0])
    p1_d0 = float(p1[d0])
    if p1_d0 > 2.0 / n:
        raise NoFeasibleRadius(
            f"P1({d0}) = {p1_d0:.3g} overshoots 2/N = {2.0 / n:.3g}; increase S"
        )

    rng = np.random.default_rng(seed)
    # Disagreement count of the pair, then its random split relative to the
    # center; both distances stay within d0 iff the shared-disagreement
    # count W <= d0 - max(b, K - b), a Binomial(S - K, 1/2) tail.
    k_draw = rng.binomial(s, 1.0 - p, size=n_trials)
    b_draw = rng.binomial(k_draw, 0.5)
    slack = d0 - np.maximum(b_draw, k_draw - b_draw)
    cond = np.where(slack >= 0, binom.cdf(np.maximum(slack, 0), s - k_draw, 0.5), 0.0)
    p2_hat = float(cond.mean())
    p2_err = float(cond.std(ddof=1) / math.sqrt(n_trials))
    if p2_hat <= 0.0:
        raise NoFeasibleRadius("estimated pair probability underflowed to zero")
    exponent = math.log(p2_hat) / math.log(p1_d0)
    stderr = p2_err / abs(p2_hat * math.log(p1_d0))
    return DubinerEstimate(exponent=exponent, stderr=stderr, d0=d0, p1_d0=p1_d0, p2_d0=p2_hat)


def dubiner_hamming_estimate(
    p: float, n: int, s: int, n_trials: int = 100_000, seed: int = 0
) -> float:
    return dubiner_hamming_estimate_detail(p, n, s, n_trials, seed).exponent


# --- inner-product embedding --------------------------------------------------

@dataclass(frozen=True)
class MipsEmbedding:
    """Per-cell weights making dot(T(x), T(y)) = log(P(x,y) / Q(x,y)).

    Cells with zero joint mass or with p equal to q contribute zero
    coordinates (there is nothing to encode for them).
    """

    jd: JointDistribution
    omega: np.ndarray

    @staticmethod
    def make(jd: JointDistribution) -> "MipsEmbedding":
        with np.errstate(divide="ignore", invalid="ignore"):
            log_ratio = np.where(jd.p > 0, np.log(jd.p) - np.log(jd.q), 0.0)
        active = (jd.p > 0) & (log_ratio != 0.0)
        omega = np.zeros_like(jd.p)
        ratio_marg = np.divide(
            jd.pa[:, None], jd.pb[None, :], out=np.ones_like(jd.p), where=jd.pb[None, :] > 0
        )
        omega[active] = (ratio_marg[active] ** 0.25) * np.abs(log_ratio[active]) ** 0.5
        return MipsEmbedding(jd=jd, omega=omega)

    def embed_a(self, x) -> np.ndarray:
        """Side-A embedding: position s, symbol i emits log(p_ij/q_ij)/omega_ij over j."""
        jd = self.jd
        x = np.asarray(x, dtype=np.intp)
        if x.size and (x.min() < 0 or x.max() >= jd.k):
            raise SymbolOutOfAlphabet("A-sequence symbol index out of range")
        with np.errstate(divide="ignore", invalid="ignore"):
            log_ratio = np.where(jd.p > 0, np.log(jd.p) - np.log(jd.q), 0.0)
        coords = np.divide(
            log_ratio, self.omega, out=np.zeros_like(log_ratio), where=self.omega > 0
        )
        out = np.zeros((x.shape[0], jd.k, jd.l))
        out[np.arange(x.shape[0]), x, :] = coords[x, :]
        return out.ravel()

    def embed_b(self, y) -> np.ndarray:
        """Side-B embedding: position s, symbol j emits omega_ij over i."""
        jd = self.jd
        y = np.asarray(y, dtype=np.intp)
        if y.size and (y.min() < 0 or y.max() >= jd.l):
            raise SymbolOutOfAlphabet("B-sequence symbol index out of range")
        out = np.zeros((y.shape[0], jd.k, jd.l))
        out[np.arange(y.shape[0]), :, y] = self.omega[:, y].T
        return out.ravel()


def mips_embed(jd: JointDistribution, seq, side: str) -> np.ndarray:
    """Flat embedding of one sequence; ``side`` is "a" (database) or "b" (query)."""
    emb = MipsEmbedding.make(jd)
    if side == "a":
        return emb.embed_a(seq)
    if side == "b":
        return emb.embed_b(seq)
    raise ValidationError(f"side must be 'a' or 'b', got {side!r}")
