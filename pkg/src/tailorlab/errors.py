"""Exception hierarchy.

Configuration problems (bad inputs, inconsistent references) are kept apart
from statistical/runtime failures because the CLI maps them to different
exit codes (2 vs 1).
"""


class TailorlabError(Exception):
    """Base class for all package errors."""


class ConfigurationError(TailorlabError):
    """Invalid parameters, schemas, or cross-references."""


class CoverageError(ConfigurationError):
    """A design or regime asks for a (rescue option, week) pair the
    potential-outcome table does not cover."""


class AnalysisError(TailorlabError):
    """An estimator cannot produce a valid answer from the given data."""


class PositivityError(AnalysisError):
    """A treatment propensity is 0 or 1 in some stratum, so the requested
    causal quantity is not identifiable from the data."""


class DegenerateDataError(AnalysisError):
    """Input data lacks the variation an estimator requires
    (single-class labels, empty strata, too few arms)."""
