"""Shared probability-matrix fixtures and frozen oracle values.

The matrices are the study distributions used throughout the suite; the
frozen scalars were produced by independent oracle scripts (exhaustive
enumeration, closed-form evaluation, or long Monte-Carlo runs) and are
asserted against, not recomputed, so a regression in the package cannot
silently move the goalposts.
"""

from __future__ import annotations

import numpy as np

from forestdsh import model

# 2x2 worked example: a dense matrix with no zero cells.
P_EXAMPLE1 = np.array([[0.4, 0.3], [0.1, 0.2]])
LAMBDA_EXAMPLE1 = 1.7203  # published target, +-0.005
# Independent high-precision solve of the same objective (frozen oracle).
LAMBDA_EXAMPLE1_ORACLE = 1.7204740995

# Interpolation endpoints: P1 has one zero cell; P2 is heavily diagonal.
P1 = np.array([[0.345, 0.0], [0.31, 0.345]])
P2 = np.array([[0.019625, 0.0], [0.036875, 0.9435]])

# Published parameter targets for P1.  The published (mu, nu, eta) triple
# violates the normalization constraint by ~6e-4, and the true optimizer
# found by exhaustive refinement is (4.9002, 4.9002, 3.2915) with a
# marginally higher objective; lambda agrees to 4 decimals either way.
P1_PUBLISHED = dict(mu=4.6611, nu=4.6611, eta=3.1462, lam=1.4384)
P1_ORACLE = dict(mu=4.9002, nu=4.9002, eta=3.2915, lam=1.4383564)

# Frozen oracle for the t=0.25 interpolation (1-t)*P1 + t*P2.
LAMBDA_T025 = 1.360741

# Closed-form baseline exponents for P1 (published, +-0.0005).
MINHASH_EXPONENT_P1 = 0.5207
LSH_HAMMING_EXPONENT_P1 = 0.4672

# Mass-spectrometry fixtures (rank-transform alphabets of size 4 and 8).
# P_MS4 sums to 1 + 3.4e-7 as published and is renormalized on load.
P_MS4 = np.array(
    [
        [0.000125, 5.008081e-5, 9.689274e-8, 0.000404],
        [5.008082e-5, 0.000209, 6.205379e-6, 0.001921],
        [9.689274e-8, 6.205379e-6, 2.688879e-5, 0.000355],
        [0.000404, 0.001921, 0.000355, 0.994165],
    ]
)
P_MS8 = np.array(
    [
        [3.458e-5, 1.442e-5, 5.434e-6, 1.723e-6, 2.920e-7, 7.496e-8, 6.718e-8, 5.023e-5],
        [1.442e-5, 3.708e-5, 2.550e-5, 8.706e-6, 1.561e-6, 4.809e-7, 2.680e-7, 1.575e-4],
        [5.434e-6, 2.550e-5, 3.907e-5, 2.948e-5, 6.442e-6, 2.008e-6, 1.251e-6, 3.672e-4],
        [1.723e-6, 8.706e-6, 2.948e-5, 4.867e-5, 1.813e-5, 6.098e-6, 4.532e-6, 5.539e-4],
        [2.921e-7, 1.561e-6, 6.442e-6, 1.813e-5, 2.887e-5, 6.892e-6, 5.309e-6, 4.138e-4],
        [7.496e-8, 4.809e-7, 2.008e-6, 6.098e-6, 6.892e-6, 2.123e-5, 5.826e-6, 3.246e-4],
        [6.718e-8, 2.680e-7, 1.251e-6, 4.531e-6, 5.309e-6, 5.826e-6, 6.411e-5, 8.364e-4],
        [5.023e-5, 1.574e-4, 3.671e-4, 5.539e-4, 4.138e-4, 3.246e-4, 8.364e-4, 0.994],
    ]
)
LAMBDA_MS4 = 1.3267
LAMBDA_MS8 = 1.2948
# The 51x51 rank matrix behind the third published lambda (1.2816) was
# never published, so that value has no reproducible input.
LAMBDA_MS51 = 1.2816


def jd_example1() -> model.JointDistribution:
    return model.from_matrix(P_EXAMPLE1, None)


def jd_p1() -> model.JointDistribution:
    return model.from_matrix(P1, None)


def jd_p2() -> model.JointDistribution:
    return model.from_matrix(P2, None)


def jd_t(t: float) -> model.JointDistribution:
    return model.from_matrix((1.0 - t) * P1 + t * P2, None)


def jd_ms4() -> model.JointDistribution:
    return model.from_matrix(P_MS4 / P_MS4.sum(), None)


def jd_ms8() -> model.JointDistribution:
    return model.from_matrix(P_MS8 / P_MS8.sum(), None)


def jd_hamming(p: float) -> model.JointDistribution:
    """Binary symmetric channel over a uniform input: equal-bit mass p."""
    return model.from_matrix(
        np.array([[p / 2, (1 - p) / 2], [(1 - p) / 2, p / 2]]), None
    )
