"""Decision-tree bucket construction and family statistics.

Each node carries the log probabilities that a jointly drawn pair
(``log_phi``), a marginal A-point (``log_psi_a``), a marginal B-point
(``log_psi_b``), or an independent pair (``log_psi``) reaches it.  The
builder walks depth-first from the root, and at every node applies the
threshold rule: accept the node as a bucket when the true-pair to
independent-pair density ratio is high enough, prune when either side's
marginal reach dominates, and branch into one child per nonzero joint
cell otherwise.  Accept wins when accept and prune both hold.

The accepted buckets form an antichain (no bucket is an ancestor of
another), which is what caps pair collisions at one bucket per band.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np
from scipy.special import logsumexp

from .errors import EmptyBucketSet, NodeBudgetExceeded, ValidationError
from .model import JointDistribution, ProblemDims
from .solver import HashParams

DEFAULT_MAX_NODES = 5_000_000


class NodeStatus(str, Enum):
    BUCKET = "bucket"
    PRUNED = "pruned"
    INTERNAL = "internal"


@dataclass(slots=True)
class TreeNode:
    """One tree node; ``children`` maps a (A-symbol, B-symbol) index pair to a child id.

    The node's prefix strings are not materialized (that would cost
    O(nodes x depth) memory); they are reconstructed from the parent chain
    via :meth:`DecisionTree.seq_a` / :meth:`DecisionTree.seq_b`.
    """

    id: int
    parent: int | None
    edge: tuple[int, int] | None
    depth: int
    log_phi: float
    log_psi_a: float
    log_psi_b: float
    status: NodeStatus
    children: dict[tuple[int, int], int] = field(default_factory=dict)

    @property
    def log_psi(self) -> float:
        return self.log_psi_a + self.log_psi_b


@dataclass
class DecisionTree:
    """Arena of nodes with the accepted bucket set and build thresholds.

    ``log_c`` holds the log-domain threshold constants (log C1, log C2,
    log C3); thresholds are kept in log form because the default constants
    underflow linear floats for large alphabets.  Immutable once built.
    """

    nodes: list[TreeNode]
    root: int
    buckets: list[int]
    log_c: tuple[float, float, float]
    lam: float
    delta: float
    n: int
    # Per-node lookup from one side's symbol to (bucket children, internal
    # children), built lazily for prefix traversal.  A single A-symbol can
    # match several (a, b) children; pruned children are omitted because a
    # traversal never needs to visit them.
    _nav_a: list | None = field(default=None, repr=False)
    _nav_b: list | None = field(default=None, repr=False)

    @property
    def max_bucket_depth(self) -> int:
        return max((self.nodes[b].depth for b in self.buckets), default=0)

    def _edge_path(self, node_id: int) -> list[tuple[int, int]]:
        path: list[tuple[int, int]] = []
        node = self.nodes[node_id]
        while node.parent is not None:
            path.append(node.edge)
            node = self.nodes[node.parent]
        path.reverse()
        return path

    def seq_a(self, node_id: int) -> tuple[int, ...]:
        """A-side prefix string of a node (root path edge A-symbols)."""
        return tuple(a for a, _b in self._edge_path(node_id))

    def seq_b(self, node_id: int) -> tuple[int, ...]:
        """B-side prefix string of a node (root path edge B-symbols)."""
        return tuple(b for _a, b in self._edge_path(node_id))

    def _build_nav(self, side_a: bool) -> list[dict[int, tuple[tuple[int, ...], tuple[int, ...]]]]:
        raw: list[dict[int, tuple[list[int], list[int]]]] = [{} for _ in self.nodes]
        for node in self.nodes:
            for (ai, bj), cid in node.children.items():
                status = self.nodes[cid].status
                if status is NodeStatus.PRUNED:
                    continue
                entry = raw[node.id].setdefault(ai if side_a else bj, ([], []))
                entry[0 if status is NodeStatus.BUCKET else 1].append(cid)
        return [
            {sym: (tuple(bks), tuple(ints)) for sym, (bks, ints) in d.items()}
            for d in raw
        ]

    def nav_a(self) -> list[dict[int, tuple[tuple[int, ...], tuple[int, ...]]]]:
        """Per-node map from A-symbol to (bucket children, internal children)."""
        if self._nav_a is None:
            self._nav_a = self._build_nav(side_a=True)
        return self._nav_a

    def nav_b(self) -> list[dict[int, tuple[tuple[int, ...], tuple[int, ...]]]]:
        """Per-node map from B-symbol to (bucket children, internal children)."""
        if self._nav_b is None:
            self._nav_b = self._build_nav(side_a=False)
        return self._nav_b


@dataclass(frozen=True)
class FamilyStats:
    """Bucket-level sums characterizing one tree of the hash family.

    ``alpha`` is the probability a true pair collides in one band;
    ``beta`` the same for an independent pair; ``gamma_a``/``gamma_b`` the
    expected number of buckets a marginal point lands in.  ``n_bands`` is
    the smallest band count whose predicted true-positive rate
    1 - (1 - alpha)^n_bands reaches ``tp_target``.
    """

    alpha: float
    beta: float
    gamma_a: float
    gamma_b: float
    n_bands: int
    tp_target: float

    @property
    def predicted_tp(self) -> float:
        return 1.0 - (1.0 - self.alpha) ** self.n_bands


def _resolve_log_c(value: float | None, params: HashParams) -> float:
    if value is None:
        return params.log_p0 + params.log_q0
    if value <= 0:
        raise ValidationError(f"threshold constants must be positive, got {value}")
    return math.log(value)


def build_tree(
    jd: JointDistribution,
    params: HashParams,
    dims: ProblemDims,
    c1: float | None = None,
    c2: float | None = None,
    c3: float | None = None,
    max_depth: int | None = None,
    max_nodes: int = DEFAULT_MAX_NODES,
) -> DecisionTree:
    """Depth-first construction of the bucket tree under the threshold rule.

    Thresholds default to C1 = C2 = C3 = p0 * q0 from the solved params.
    Branches reaching ``max_depth`` are pruned; exceeding ``max_nodes``
    aborts the build.
    """
    log_n = math.log(dims.n)
    delta = dims.delta
    lam = params.lam
    lc1 = _resolve_log_c(c1, params)
    lc2 = _resolve_log_c(c2, params)
    lc3 = _resolve_log_c(c3, params)
    t_accept = lc1 + (1.0 + delta - lam) * log_n
    t_prune_a = lc2 + (1.0 - lam) * log_n
    t_prune_b = lc3 + (delta - lam) * log_n
    depth_cap = dims.s if max_depth is None else min(max_depth, dims.s)

    rows, cols = np.nonzero(jd.nonzero_cells())
    cell_lp = jd.logp[rows, cols]
    cell_la = jd.logpa[rows]
    cell_lb = jd.logpb[cols]
    cells = list(zip(rows.tolist(), cols.tolist(), cell_lp.tolist(),
                     cell_la.tolist(), cell_lb.tolist()))

    def status_of(log_phi: float, log_psi_a: float, log_psi_b: float, depth: int) -> NodeStatus:
        if log_phi - (log_psi_a + log_psi_b) >= t_accept:
            return NodeStatus.BUCKET
        if log_phi - log_psi_a <= t_prune_a or log_phi - log_psi_b <= t_prune_b:
            return NodeStatus.PRUNED
        if depth >= depth_cap:
            return NodeStatus.PRUNED
        return NodeStatus.INTERNAL

    nodes: list[TreeNode] = []
    buckets: list[int] = []
    root_status = status_of(0.0, 0.0, 0.0, 0)
    nodes.append(TreeNode(0, None, None, 0, 0.0, 0.0, 0.0, root_status))
    if root_status is NodeStatus.BUCKET:
        buckets.append(0)
    stack = [0] if root_status is NodeStatus.INTERNAL else []
    while stack:
        nid = stack.pop()
        parent = nodes[nid]
        for ai, bj, lp, la, lb in cells:
            if len(nodes) >= max_nodes:
                raise NodeBudgetExceeded(
                    f"node budget {max_nodes} exceeded; thresholds too permissive"
                )
            log_phi = parent.log_phi + lp
            log_psi_a = parent.log_psi_a + la
            log_psi_b = parent.log_psi_b + lb
            status = status_of(log_phi, log_psi_a, log_psi_b, parent.depth + 1)
            cid = len(nodes)
            child = TreeNode(
                cid,
                nid,
                (ai, bj),
                parent.depth + 1,
                log_phi,
                log_psi_a,
                log_psi_b,
                status,
            )
            nodes.append(child)
            parent.children[(ai, bj)] = cid
            if status is NodeStatus.BUCKET:
                buckets.append(cid)
            elif status is NodeStatus.INTERNAL:
                stack.append(cid)
    if not buckets:
        raise EmptyBucketSet(
            "no node was accepted as a bucket; lower C1 or raise max_depth"
        )
    return DecisionTree(
        nodes=nodes, root=0, buckets=buckets,
        log_c=(lc1, lc2, lc3), lam=lam, delta=delta, n=dims.n,
    )


def family_stats(tree: DecisionTree, tp_target: float) -> FamilyStats:
    """Exact bucket sums (via log-sum-exp) and the band count for ``tp_target``."""
    if not tree.buckets:
        raise EmptyBucketSet("tree has no buckets")
    if not 0.0 < tp_target < 1.0:
        raise ValidationError(f"tp_target must be in (0, 1), got {tp_target}")
    lphi = np.array([tree.nodes[b].log_phi for b in tree.buckets])
    lpsa = np.array([tree.nodes[b].log_psi_a for b in tree.buckets])
    lpsb = np.array([tree.nodes[b].log_psi_b for b in tree.buckets])
    alpha = float(np.exp(logsumexp(lphi)))
    beta = float(np.exp(logsumexp(lpsa + lpsb)))
    gamma_a = float(np.exp(logsumexp(lpsa)))
    gamma_b = float(np.exp(logsumexp(lpsb)))
    alpha = min(alpha, 1.0)
    n_bands = max(1, math.ceil(math.log(1.0 / (1.0 - tp_target)) / alpha))
    return FamilyStats(
        alpha=alpha, beta=beta, gamma_a=gamma_a, gamma_b=gamma_b,
        n_bands=n_bands, tp_target=tp_target,
    )


def _walk_pair(tree: DecisionTree, x: np.ndarray, y: np.ndarray) -> bool:
    """Whether the joint path of (x, y) reaches a bucket (at most one exists)."""
    node = tree.nodes[tree.root]
    depth = 0
    while True:
        if node.status is NodeStatus.BUCKET:
            return True
        if node.status is NodeStatus.PRUNED:
            return False
        if depth >= len(x):
            return False
        cid = node.children.get((int(x[depth]), int(y[depth])))
        if cid is None:
            return False
        node = tree.nodes[cid]
        depth += 1


def traverse_buckets(
    nav: list[dict[int, tuple[tuple[int, ...], tuple[int, ...]]]],
    root: int,
    root_status: NodeStatus,
    seq: list[int],
) -> list[int]:
    """Ids of buckets whose side prefix matches ``seq`` (multi-match traversal)."""
    if root_status is NodeStatus.BUCKET:
        return [root]
    if root_status is NodeStatus.PRUNED:
        return []
    hits: list[int] = []
    frontier = [root]
    for sym in seq:
        nxt: list[int] = []
        for nid in frontier:
            entry = nav[nid].get(sym)
            if entry is None:
                continue
            buckets, internals = entry
            if buckets:
                hits.extend(buckets)
            if internals:
                nxt.extend(internals)
        if not nxt:
            break
        frontier = nxt
    return hits


def _membership_count(tree: DecisionTree, seq: np.ndarray, side_a: bool) -> int:
    """Number of buckets whose side prefix matches ``seq``."""
    nav = tree.nav_a() if side_a else tree.nav_b()
    root_status = tree.nodes[tree.root].status
    return len(traverse_buckets(nav, tree.root, root_status, [int(v) for v in seq]))


def estimate_family_stats(
    tree: DecisionTree,
    jd: JointDistribution,
    n_samples: int,
    seed: int,
) -> tuple[float, float, float, float]:
    """Monte-Carlo estimates of (alpha, beta, gamma_a, gamma_b).

    True pairs are sampled jointly for alpha; independent marginal draws
    feed beta and the per-side membership counts.
    """
    rng = np.random.default_rng(seed)
    s = max(tree.max_bucket_depth, 1)
    flat = jd.p.ravel()
    pair_idx = rng.choice(flat.size, size=(n_samples, s), p=flat)
    px, py = np.divmod(pair_idx, jd.l)
    xa = rng.choice(jd.k, size=(n_samples, s), p=jd.pa)
    yb = rng.choice(jd.l, size=(n_samples, s), p=jd.pb)

    alpha_hits = sum(_walk_pair(tree, px[i], py[i]) for i in range(n_samples))
    beta_hits = sum(_walk_pair(tree, xa[i], yb[i]) for i in range(n_samples))
    ga_counts = sum(_membership_count(tree, xa[i], side_a=True) for i in range(n_samples))
    gb_counts = sum(_membership_count(tree, yb[i], side_a=False) for i in range(n_samples))
    return (
        alpha_hits / n_samples,
        beta_hits / n_samples,
        ga_counts / n_samples,
        gb_counts / n_samples,
    )


def complexity_report(
    tree: DecisionTree,
    stats: FamilyStats,
    dims: ProblemDims,
    cost_model: tuple[float, float, float, float] = (1.0, 1.0, 1.0, 1.0),
) -> float:
    """Predicted total cost of a build-and-query run.

    Sums tree construction, per-point hashing, bucket insertions, and
    candidate checks, with the last three scaled by the expected number of
    bands ln(1 / (1 - TP)) / alpha.
    """
    c_tree, c_hash, c_insertion, c_pos = cost_model
    n, m = dims.n, dims.m
    band_factor = math.log(1.0 / (1.0 - stats.predicted_tp)) / stats.alpha
    return (
        c_tree * len(tree.nodes)
        + (
            c_hash * (n + m)
            + c_insertion * (n * stats.gamma_a + m * stats.gamma_b)
            + c_pos * m * n * stats.beta
        )
        * band_factor
    )


# --- serialization ----------------------------------------------------------

def save_tree(tree: DecisionTree, path: str | Path) -> None:
    """JSON dump of nodes, buckets, and thresholds (reloadable without the model)."""
    doc = {
        "log_c": list(tree.log_c),
        "lam": tree.lam,
        "delta": tree.delta,
        "n": tree.n,
        "root": tree.root,
        "buckets": tree.buckets,
        "nodes": [
            {
                "parent": nd.parent,
                "edge": list(nd.edge) if nd.edge is not None else None,
                "depth": nd.depth,
                "phi": nd.log_phi,
                "psa": nd.log_psi_a,
                "psb": nd.log_psi_b,
                "status": nd.status.value,
                "children": [[ai, bj, cid] for (ai, bj), cid in nd.children.items()],
            }
            for nd in tree.nodes
        ],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)


def load_tree(path: str | Path) -> DecisionTree:
    with open(path) as fh:
        doc = json.load(fh)
    nodes = []
    for i, nd in enumerate(doc["nodes"]):
        nodes.append(
            TreeNode(
                id=i,
                parent=nd["parent"],
                edge=tuple(nd["edge"]) if nd["edge"] is not None else None,
                depth=nd["depth"],
                log_phi=nd["phi"],
                log_psi_a=nd["psa"],
                log_psi_b=nd["psb"],
                status=NodeStatus(nd["status"]),
                children={(ai, bj): cid for ai, bj, cid in nd["children"]},
            )
        )
    return DecisionTree(
        nodes=nodes,
        root=doc["root"],
        buckets=list(doc["buckets"]),
        log_c=tuple(doc["log_c"]),
        lam=doc["lam"],
        delta=doc["delta"],
        n=doc["n"],
    )
