"""Tailoring rules: the deterministic logic mapping observed trajectories
to responder/nonresponder status.

A rule is a decision week plus one or two atomic conditions. Each atomic
condition aggregates one observed variable over weeks 1..K and compares
the aggregate to a cutoff. Nonresponse is strict: a participant sitting
exactly on the cutoff is a responder, whichever direction the condition
uses. A two-condition rule classifies a nonresponder only when both
conditions hold.

Everything here is pure and immutable; higher-is-better is the outcome
convention used throughout the package.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Literal, Mapping

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from .errors import ConfigurationError

Aggregation = Literal["mean_rate", "cumulative_sum", "running_max", "last_value"]
Direction = Literal["below", "above"]

RESPONDER = "responder"
NONRESPONDER = "nonresponder"


@dataclass(frozen=True, slots=True)
class ObservedTrajectory:
    """Weekly nonnegative values for each observed variable, weeks 1..T.

    `values` maps variable id to a length-T tuple; index 0 is week 1.
    """

    values: dict[str, tuple[float, ...]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        lengths = {len(v) for v in self.values.values()}
        if len(lengths) > 1:
            raise ConfigurationError("all variables must cover the same weeks")
        for var, series in self.values.items():
            if any(x < 0 for x in series):
                raise ConfigurationError(f"negative value in trajectory of {var!r}")

    @property
    def horizon(self) -> int:
        return len(next(iter(self.values.values()))) if self.values else 0

    def series(self, variable: str) -> tuple[float, ...]:
        try:
            return self.values[variable]
        except KeyError:
            raise ConfigurationError(f"unknown observed variable {variable!r}") from None


class AtomicCondition(BaseModel):
    """One aggregated-variable-vs-cutoff comparison.

    direction 'below' marks nonresponse when the aggregate is strictly
    below the cutoff (low activity = doing poorly); 'above' when it is
    strictly above (high symptom count = doing poorly).
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    variable: str
    aggregation: Aggregation = "mean_rate"
    direction: Direction = "below"
    cutoff: float

    @model_validator(mode="after")
    def _check(self) -> "AtomicCondition":
        if not np.isfinite(self.cutoff):
            raise ConfigurationError("cutoff must be finite")
        return self


class TailoringRule(BaseModel):
    """Decision week plus one or two atomic conditions (conjunction)."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    decision_week: int
    conditions: tuple[AtomicCondition, ...]

    @model_validator(mode="after")
    def _check(self) -> "TailoringRule":
        if self.decision_week < 1:
            raise ConfigurationError("decision_week must be >= 1")
        if len(self.conditions) not in (1, 2):
            raise ConfigurationError("a rule takes one or two conditions")
        if len(self.conditions) == 2:
            a, b = self.conditions
            if a.variable == b.variable:
                raise ConfigurationError(
                    "conjunction conditions must use two distinct variables"
                )
        return self

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(c.variable for c in self.conditions)

    def with_cutoff(self, cutoff: float) -> "TailoringRule":
        """Single-condition rule with the cutoff replaced (used by
        cutoff-randomizing designs)."""
        if len(self.conditions) != 1:
            raise ConfigurationError("with_cutoff applies to single-condition rules")
        cond = self.conditions[0].model_copy(update={"cutoff": cutoff})
        return self.model_copy(update={"conditions": (cond,)})

    def with_decision_week(self, week: int) -> "TailoringRule":
        return self.model_copy(update={"decision_week": week})


class AdaptiveIntervention(BaseModel):
    """A full regime: initial treatment, tailoring rule, rescue option for
    nonresponders."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    initial_treatment: str = "initial"
    rule: TailoringRule
    rescue_option: str


@dataclass(frozen=True, slots=True)
class PathStep:
    """One stochastic randomization actually applied to a participant."""

    week: int
    action: str
    probability: float


@dataclass(frozen=True, slots=True)
class TrialRecord:
    """One participant's assignments, classification, action, and outcomes.

    `arms` maps randomized factor name (variable/cutoff/time/rescue/action)
    to the assigned level label. `response` is None in designs that never
    classify the participant. `y_bin` is 1 iff y reached the scenario's
    success threshold; `y_adj` is the cost-adjusted outcome.
    """

    participant_id: int
    arms: dict[str, str]
    trajectory: ObservedTrajectory
    response: int | None
    classification_week: int | None
    rescued: int
    rescue_week: int | None
    rescue_option: str | None
    y: float
    y_bin: int
    y_adj: float
    path: tuple[PathStep, ...]


def aggregate_matrix(series: np.ndarray, aggregation: Aggregation, week: int) -> np.ndarray:
    """Aggregate an (N, T) matrix of weekly values over weeks 1..week.

    mean_rate is the cumulative sum divided by the window length, so a
    cumulative cutoff c is equivalent to a mean-rate cutoff c/week.
    """
    series = np.asarray(series, dtype=float)
    if series.ndim == 1:
        series = series[None, :]
    if not 1 <= week <= series.shape[1]:
        raise ConfigurationError(
            f"aggregation week {week} outside trajectory horizon {series.shape[1]}"
        )
    window = series[:, :week]
    if aggregation == "mean_rate":
        return window.sum(axis=1) / week
    if aggregation == "cumulative_sum":
        return window.sum(axis=1)
    if aggregation == "running_max":
        return window.max(axis=1)
    if aggregation == "last_value":
        return window[:, week - 1]
    raise ConfigurationError(f"unknown aggregation {aggregation!r}")


def aggregate_feature(
    trajectory: ObservedTrajectory, condition: AtomicCondition, week: int
) -> float:
    """Aggregate the condition's variable over weeks 1..week for one person."""
    series = np.asarray(trajectory.series(condition.variable), dtype=float)
    return float(aggregate_matrix(series, condition.aggregation, week)[0])


def nonresponder_mask(
    matrices: Mapping[str, np.ndarray], rule: TailoringRule
) -> np.ndarray:
    """Vectorized classification: True where the rule marks nonresponse.

    `matrices` maps variable id to an (N, T) array of weekly values.
    This is the single implementation of the classification logic; the
    scalar `classify_response` wraps it.
    """
    mask: np.ndarray | None = None
    for cond in rule.conditions:
        if cond.variable not in matrices:
            raise ConfigurationError(f"unknown observed variable {cond.variable!r}")
        agg = aggregate_matrix(matrices[cond.variable], cond.aggregation, rule.decision_week)
        hit = agg < cond.cutoff if cond.direction == "below" else agg > cond.cutoff
        mask = hit if mask is None else (mask & hit)
    assert mask is not None
    return mask


def classify_response(trajectory: ObservedTrajectory, rule: TailoringRule) -> str:
    """Classify one participant; returns 'responder' or 'nonresponder'."""
    matrices = {
        var: np.asarray(trajectory.series(var), dtype=float)[None, :]
        for var in rule.variables
    }
    return NONRESPONDER if bool(nonresponder_mask(matrices, rule)[0]) else RESPONDER


def record_matrices(
    records: list[TrialRecord], variables: tuple[str, ...] | None = None
) -> dict[str, np.ndarray]:
    """Stack record trajectories back into per-variable (N, T) matrices."""
    if not records:
        return {}
    if variables is None:
        variables = tuple(records[0].trajectory.values.keys())
    return {
        var: np.array([r.trajectory.series(var) for r in records], dtype=float)
        for var in variables
    }


def with_adjusted_outcome(record: TrialRecord, y_adj: float) -> TrialRecord:
    return replace(record, y_adj=y_adj)
