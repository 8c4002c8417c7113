"""Exception hierarchy.

Errors are grouped into two families so the CLI can map them onto exit
codes: :class:`ValidationError` (bad inputs or infeasible configuration,
exit code 2) and :class:`BudgetError` (a runtime resource budget was
exhausted, exit code 3).
"""

from __future__ import annotations


class ForestDSHError(Exception):
    """Base class for all library errors."""


class ValidationError(ForestDSHError):
    """Input or configuration is invalid or infeasible (CLI exit code 2)."""


class BudgetError(ForestDSHError):
    """A runtime resource budget was exceeded (CLI exit code 3)."""


# --- distribution model ----------------------------------------------------

class NotADistribution(ValidationError):
    """Matrix has a negative entry or does not sum to 1 within tolerance."""


class EmptyAlphabet(ValidationError):
    """An alphabet with zero symbols was supplied."""


class LengthMismatch(ValidationError):
    """Sequences have inconsistent lengths."""


class SymbolOutOfAlphabet(ValidationError):
    """A sequence contains a symbol index outside its alphabet."""


class EmptyTrainingSet(ValidationError):
    """No training pairs were supplied for estimation."""


# --- parameter solver ------------------------------------------------------

class NoFeasiblePoint(ValidationError):
    """No grid triple satisfies the constraint within tolerance."""


class DegenerateRatio(ValidationError):
    """All joint/marginal ratios equal 1; the noise-depth constant is undefined."""


# --- tree builder ----------------------------------------------------------

class NodeBudgetExceeded(BudgetError):
    """Tree construction exceeded the node budget (thresholds too permissive)."""


class EmptyBucketSet(ValidationError):
    """No node was accepted as a bucket (accept threshold too large)."""


# --- query engine ----------------------------------------------------------

class NoCandidate(ValidationError):
    """No bucket collision produced any candidate for the query."""


# --- baselines -------------------------------------------------------------

class UndefinedRatio(ValidationError):
    """A closed-form exponent ratio is undefined for this distribution."""


class TuningFailed(ValidationError):
    """No (rows, bands) setting within budget achieves the recall target."""


class NoFeasibleRadius(ValidationError):
    """No hamming radius achieves the required single-point hit rate."""


# --- data tools ------------------------------------------------------------

class PerturbationInfeasible(ValidationError):
    """Could not sample a valid perturbed distribution inside the band."""


class InvalidRank(ValidationError):
    """A peak rank below 1 was supplied."""


# --- bench -----------------------------------------------------------------

class AllBuildsFailed(ValidationError):
    """Every grid point in a threshold sweep failed to build a usable tree."""
