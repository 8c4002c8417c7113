"""Optimal hash-family parameter solver.

Finds the exponent triple (mu, nu, eta) maximizing the complexity exponent

    lambda = (max(1, delta) + mu + delta * nu) / (1 + mu + nu - eta)

subject to the manifold constraint

    sum_{ij, p_ij > 0} p_ij^(1 + mu + nu - eta) * pa_i^(-mu) * pb_j^(-nu) = 1

with min(mu, nu) >= eta >= 0.  The solve is two-stage: a coarse vectorized
grid scan for feasible triples, then refinement that re-solves eta by
bisection (the constraint is monotone increasing in eta because every
p_ij <= 1) and hill-climbs (mu, nu) until lambda stops improving.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateRatio, NoFeasiblePoint
from .model import JointDistribution, ProblemDims

DEFAULT_GRID_MAX = 20.0
DEFAULT_GRID_STEP = 0.1
DEFAULT_ETA_STEP = 0.05
DEFAULT_COARSE_TOL = 0.01
BISECT_TOL = 1e-9
CLIMB_TOL = 1e-6


@dataclass(frozen=True)
class HashParams:
    """Solved family parameters and derived threshold constants.

    ``r_star`` is the per-cell optimum allocation (the constraint terms at
    the solution; they sum to 1).  ``n_star`` is the predicted optimal
    bucket depth for the given problem size.  ``p0``/``q0`` set the default
    accept/prune threshold constants C1 = C2 = C3 = p0 * q0, with log-domain
    twins ``log_p0``/``log_q0`` for use at scales where the linear values
    underflow.
    """

    mu: float
    nu: float
    eta: float
    lam: float
    delta: float
    p0: float
    q0: float
    log_p0: float
    log_q0: float
    r_star: np.ndarray
    n_star: float


def _log_terms(jd: JointDistribution, mu: float, nu: float, eta: float) -> np.ndarray:
    """Per-nonzero-cell log of p^(1+mu+nu-eta) * pa^(-mu) * pb^(-nu)."""
    mask = jd.nonzero_cells()
    rows, cols = np.nonzero(mask)
    lp = jd.logp[rows, cols]
    la = jd.logpa[rows]
    lb = jd.logpb[cols]
    return (1.0 + mu + nu - eta) * lp - mu * la - nu * lb


def constraint_value(jd: JointDistribution, mu: float, nu: float, eta: float) -> float:
    """Value of the manifold constraint sum; equals 1 on the manifold."""
    return float(np.exp(_log_terms(jd, mu, nu, eta)).sum())


def _lambda(mu: float, nu: float, eta: float, delta: float) -> float:
    denom = 1.0 + mu + nu - eta
    if denom <= 0:
        return -math.inf
    return (max(1.0, delta) + mu + delta * nu) / denom


def _bisect_eta(jd, mu: float, nu: float, lp, la, lb) -> float | None:
    """Solve constraint(mu, nu, eta) = 1 for eta in [0, min(mu, nu)].

    The constraint is monotone increasing in eta and <= 1 at eta = 0,
    so a root exists iff the value at the upper endpoint reaches 1.
    Returns None when infeasible.
    """
    hi = min(mu, nu)

    def cv(eta: float) -> float:
        return float(np.exp((1.0 + mu + nu - eta) * lp - mu * la - nu * lb).sum())

    # A 1e-9 slack keeps boundary solutions (root exactly at eta = min(mu, nu))
    # from being rejected by floating-point rounding of the constraint sum.
    if cv(hi) < 1.0 - 1e-9:
        return None
    if cv(hi) <= 1.0:
        return hi
    lo = 0.0
    if cv(lo) >= 1.0:
        return lo
    while hi - lo > BISECT_TOL:
        mid = 0.5 * (lo + hi)
        if cv(mid) < 1.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def compute_p0_q0(jd: JointDistribution) -> tuple[float, float, float, float]:
    """Threshold constants: returns (p0, q0, log_p0, log_q0).

    p0 is the product of all nonzero joint cells.  q0 is the smallest of
    the product of the matching independence cells, the product of the
    A-marginals each raised to the B-alphabet size, and the B-marginals
    each raised to the A-alphabet size.
    """
    mask = jd.nonzero_cells()
    rows, cols = np.nonzero(mask)
    log_p0 = float(jd.logp[rows, cols].sum())
    with np.errstate(divide="ignore"):
        logq = np.log(jd.q[rows, cols])
    log_q_cells = float(logq.sum())
    log_pa_prod = float(jd.l * jd.logpa[jd.pa > 0].sum())
    log_pb_prod = float(jd.k * jd.logpb[jd.pb > 0].sum())
    log_q0 = min(log_q_cells, log_pa_prod, log_pb_prod)
    return math.exp(log_p0), math.exp(log_q0), log_p0, log_q0


def solve_params(
    jd: JointDistribution,
    dims: ProblemDims,
    grid_max: float = DEFAULT_GRID_MAX,
    grid_step: float = DEFAULT_GRID_STEP,
    eta_step: float = DEFAULT_ETA_STEP,
    coarse_tol: float = DEFAULT_COARSE_TOL,
) -> HashParams:
    """Two-stage solve: coarse grid scan plus bisection/hill-climb refinement."""
    delta = dims.delta
    mask = jd.nonzero_cells()
    rows, cols = np.nonzero(mask)
    lp = jd.logp[rows, cols]
    la = jd.logpa[rows]
    lb = jd.logpb[cols]

    mus = np.arange(0.0, grid_max + 1e-12, grid_step)
    etas = np.arange(0.0, grid_max + 1e-12, eta_step)

    best_lam = -math.inf
    best = None
    # Scan one mu-slice at a time to bound memory at len(nu) x len(eta).
    nus = mus
    for mu in mus:
        expo = 1.0 + mu + nus[:, None] - etas[None, :]
        # cv(nu, eta) = sum_cells exp(expo*lp - mu*la - nu*lb); cells are
        # processed in blocks to bound peak memory for large alphabets.
        cv = np.zeros(expo.shape)
        block = max(1, 8_000_000 // expo.size)
        for start in range(0, lp.size, block):
            sl = slice(start, start + block)
            terms = (
                expo[None, :, :] * lp[sl, None, None]
                - mu * la[sl, None, None]
                - nus[None, :, None] * lb[sl, None, None]
            )
            cv += np.exp(terms).sum(axis=0)
        feas = (np.abs(cv - 1.0) <= coarse_tol) & (np.minimum(mu, nus)[:, None] >= etas[None, :])
        if not feas.any():
            continue
        denom = 1.0 + mu + nus[:, None] - etas[None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            lam = (max(1.0, delta) + mu + delta * nus[:, None]) / denom
        lam = np.where((denom > 0) & feas, lam, -np.inf)
        idx = np.unravel_index(np.argmax(lam), lam.shape)
        if lam[idx] > best_lam:
            best_lam = float(lam[idx])
            best = (float(mu), float(nus[idx[0]]), float(etas[idx[1]]))
    if best is None:
        raise NoFeasiblePoint(
            "no grid triple satisfies the constraint within tolerance; "
            "widen or refine the grids"
        )

    # Refinement: hill-climb (mu, nu) with eta re-solved by bisection.
    def eval_point(mu: float, nu: float) -> tuple[float, float] | None:
        if mu < 0 or nu < 0 or mu > grid_max or nu > grid_max:
            return None
        eta = _bisect_eta(jd, mu, nu, lp, la, lb)
        if eta is None:
            return None
        return _lambda(mu, nu, eta, delta), eta

    mu, nu = best[0], best[1]
    cur = eval_point(mu, nu)
    if cur is None:
        # The coarse winner may sit above the exact manifold; walk up mu/nu
        # until bisection becomes feasible (cv at eta = min(mu, nu) >= 1).
        for bump in np.arange(grid_step, 5 * grid_step + 1e-12, grid_step):
            cur = eval_point(mu + bump, nu + bump)
            if cur is not None:
                mu += bump
                nu += bump
                break
    if cur is None:
        raise NoFeasiblePoint("refinement could not reach the constraint manifold")
    lam, eta = cur

    step = grid_step
    while step > 1e-7:
        improved = False
        for dmu, dnu in ((1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1), (1, -1), (-1, 1)):
            cand = eval_point(mu + dmu * step, nu + dnu * step)
            if cand is not None and cand[0] > lam + CLIMB_TOL:
                mu, nu = mu + dmu * step, nu + dnu * step
                lam, eta = cand
                improved = True
                break
        if not improved:
            step *= 0.5

    r_star = np.zeros_like(jd.p)
    r_star[rows, cols] = np.exp((1.0 + mu + nu - eta) * lp - mu * la - nu * lb)

    # Optimal bucket depth: n* = (max(1, delta) - lambda) * log N / sum r* log(p/r*).
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio_logs = lp - np.log(r_star[rows, cols])
    denom = float((r_star[rows, cols] * ratio_logs).sum())
    n_star = (max(1.0, delta) - lam) * math.log(dims.n) / denom if denom != 0 else math.inf

    p0, q0, log_p0, log_q0 = compute_p0_q0(jd)
    return HashParams(
        mu=mu, nu=nu, eta=eta, lam=lam, delta=delta,
        p0=p0, q0=q0, log_p0=log_p0, log_q0=log_q0,
        r_star=r_star, n_star=n_star,
    )


def noise_complexity_bound(params: HashParams, jd: JointDistribution, epsilon: float) -> float:
    """Complexity exponent guarantee under a multiplicative (1 + epsilon) model error.

    Returns lambda* + 3 * c_d * log(1 + epsilon), where c_d relates the
    exponent surplus over the trivial lower bound to the depth scale of the
    tree via the best joint-to-marginal probability ratio.
    """
    if epsilon < 0:
        raise DegenerateRatio("epsilon must be non-negative")
    mask = jd.nonzero_cells()
    rows, cols = np.nonzero(mask)
    ratio_a = jd.p[rows, cols] / jd.pa[rows]
    ratio_b = jd.p[rows, cols] / jd.pb[cols]
    best = float(np.max(np.minimum(ratio_a, ratio_b)))
    if best == 1.0:
        raise DegenerateRatio("all joint/marginal ratios equal 1; depth constant undefined")
    c_d = (params.lam - min(1.0, params.delta)) / abs(math.log(best))
    return params.lam + 3.0 * c_d * math.log1p(epsilon)
