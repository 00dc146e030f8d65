"""Synthetic populations with full potential-outcome tables.

The generative world is a single latent severity score per participant
that drives both the weekly observed variables and the final outcome:

    S ~ N(0, 1)
    O_t = max(0, level + phi * (O_{t-1} - level) + eps_t),  level = mu + loading * S
    Y(no rescue) = alpha0 + severity_effect * S + eta
    Y(rescue r at week t) = Y(no rescue) + (effect_r + moderation_r * S) * exp(-decay_r * (t - 1))

The AR(1) recursion starts at zero deviation (O_0 = level), and the
truncation at zero feeds back into the recursion, so counts stay
nonnegative at the price of a small upward bias near zero. The rescue
offset decays from week 1, the earliest week a decision can be made.
Because tailoring variables and the outcome share only S, an observed
variable moderates the rescue effect exactly to the extent it tracks
severity, and no rule has any direct effect on outcomes beyond the
actions it triggers.

Everything is deterministic given the master seed: severity first, then
each variable's innovations in declared order, then outcome noise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from . import seeds
from .errors import ConfigurationError, CoverageError
from .rules import AdaptiveIntervention, ObservedTrajectory, nonresponder_mask


class VariableParams(BaseModel):
    """AR(1) trajectory parameters for one observed variable."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    baseline: float
    severity_loading: float = 0.0
    ar_coefficient: float = 0.0
    noise_sd: float = 1.0

    @model_validator(mode="after")
    def _check(self) -> "VariableParams":
        if not abs(self.ar_coefficient) < 1:
            raise ConfigurationError("ar_coefficient must satisfy |phi| < 1")
        if self.noise_sd < 0:
            raise ConfigurationError("noise_sd must be >= 0")
        return self


class OutcomeParams(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    intercept: float = 0.0
    severity_effect: float = 0.0
    noise_sd: float = 1.0

    @model_validator(mode="after")
    def _check(self) -> "OutcomeParams":
        if self.noise_sd < 0:
            raise ConfigurationError("outcome noise_sd must be >= 0")
        return self


class RescueParams(BaseModel):
    """Effect of one rescue option: main effect, severity moderation, and
    exponential decay per week of delivery delay."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    effect: float = 0.0
    severity_moderation: float = 0.0
    delay_decay: float = 0.0

    @model_validator(mode="after")
    def _check(self) -> "RescueParams":
        if self.delay_decay < 0:
            raise ConfigurationError("delay_decay must be >= 0")
        return self


class ScenarioParams(BaseModel):
    """Generative world parameters. Higher outcome = better, always;
    ingest lower-is-better outcomes negated."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    horizon: int = 10
    n_participants: int = 1000
    variables: dict[str, VariableParams]
    outcome: OutcomeParams = OutcomeParams()
    rescue_options: dict[str, RescueParams]
    cost_penalty: float = 0.0
    success_threshold: float = 0.0
    seed: int = 0

    @model_validator(mode="after")
    def _check(self) -> "ScenarioParams":
        if self.horizon < 1:
            raise ConfigurationError("horizon must be >= 1")
        if self.n_participants < 1:
            raise ConfigurationError("n_participants must be >= 1")
        if not self.variables:
            raise ConfigurationError("at least one observed variable is required")
        if not self.rescue_options:
            raise ConfigurationError("at least one rescue option is required")
        if self.cost_penalty < 0:
            raise ConfigurationError("cost_penalty must be >= 0")
        return self


@dataclass(frozen=True)
class PotentialOutcomeTable:
    """Per-participant potential outcomes under every action sequence a
    design can assign.

    Trajectories are under initial treatment. Rescue potential outcomes
    are exposed through `y_rescue(option, week)` for every configured
    option and every week 1..horizon; the closed-form rescue offset means
    they need not be materialized.
    """

    params: ScenarioParams
    severity: np.ndarray
    trajectories: dict[str, np.ndarray]
    y_no_rescue: np.ndarray

    @property
    def n(self) -> int:
        return self.y_no_rescue.shape[0]

    def rescue_offset(self, option: str, week: int) -> np.ndarray:
        """(effect + moderation * S) * exp(-decay * (week - 1)) per person."""
        try:
            rp = self.params.rescue_options[option]
        except KeyError:
            raise CoverageError(f"rescue option {option!r} not in scenario") from None
        if not 1 <= week <= self.params.horizon:
            raise CoverageError(
                f"rescue week {week} outside horizon 1..{self.params.horizon}"
            )
        return (rp.effect + rp.severity_moderation * self.severity) * np.exp(
            -rp.delay_decay * (week - 1)
        )

    def y_rescue(self, option: str, week: int) -> np.ndarray:
        return self.y_no_rescue + self.rescue_offset(option, week)

    def y_bin(self, y: np.ndarray) -> np.ndarray:
        return (y >= self.params.success_threshold).astype(int)

    def trajectory_of(self, i: int) -> ObservedTrajectory:
        return ObservedTrajectory(
            {var: tuple(mat[i].tolist()) for var, mat in self.trajectories.items()}
        )


def gen_population(
    params: ScenarioParams, rng: np.random.Generator | None = None
) -> PotentialOutcomeTable:
    """Draw a population from the scenario's structural model.

    The optional `rng` lets Monte Carlo drivers supply replicate-specific
    child streams; by default the stream is derived from params.seed.
    """
    if rng is None:
        rng = seeds.substream(params.seed, seeds.POPULATION)
    n, horizon = params.n_participants, params.horizon

    severity = rng.standard_normal(n)
    trajectories: dict[str, np.ndarray] = {}
    for var, vp in params.variables.items():
        innovations = rng.standard_normal((n, horizon)) * vp.noise_sd
        level = vp.baseline + vp.severity_loading * severity
        values = np.empty((n, horizon))
        prev = level
        for t in range(horizon):
            prev = np.maximum(
                0.0, level + vp.ar_coefficient * (prev - level) + innovations[:, t]
            )
            values[:, t] = prev
        trajectories[var] = values

    eta = rng.standard_normal(n) * params.outcome.noise_sd
    y0 = params.outcome.intercept + params.outcome.severity_effect * severity + eta
    return PotentialOutcomeTable(
        params=params, severity=severity, trajectories=trajectories, y_no_rescue=y0
    )


def regime_truth(
    table: PotentialOutcomeTable,
    adi: AdaptiveIntervention,
    cost_adjusted: bool = False,
) -> float:
    """Exact population mean outcome if everyone followed the regime.

    Nonresponders under the rule (evaluated on their initial-treatment
    trajectory) take the rescue outcome at the decision week, minus the
    cost penalty when `cost_adjusted`; responders keep the no-rescue
    outcome. This plug-in value is the oracle all estimators are checked
    against.
    """
    rule = adi.rule
    if rule.decision_week > table.params.horizon:
        raise CoverageError(
            f"decision week {rule.decision_week} outside horizon {table.params.horizon}"
        )
    nonresp = nonresponder_mask(table.trajectories, rule)
    y_rescued = table.y_rescue(adi.rescue_option, rule.decision_week)
    if cost_adjusted:
        y_rescued = y_rescued - table.params.cost_penalty
    return float(np.where(nonresp, y_rescued, table.y_no_rescue).mean())
