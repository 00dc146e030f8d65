"""Run configuration: one JSON document with scenario, design, analysis,
and optional Monte Carlo blocks.

Schemas are strict: unknown keys are rejected, and cross-references
(variable ids, rescue ids, weeks) are validated up front so a misconfigured
causal scenario fails loudly before anything runs.
"""

from __future__ import annotations

import json
from typing import Literal

from pydantic import BaseModel, ConfigDict, ValidationError, model_validator

from .designs import (
    DesignSpec,
    InitialOnly,
    RULE_BASED_TYPES,
    SinglyRandomizedRescue,
    UnrestrictedSmart,
    rule_cells,
    spec_rescue_options,
)
from .errors import ConfigurationError
from .montecarlo import NamedRegime, Outcome
from .rules import Aggregation, Direction, TailoringRule
from .scenario import ScenarioParams

EstimatorName = Literal[
    "contrasts",
    "conditional_mean",
    "elbow",
    "cutoff_scan",
    "ipw",
    "moderation",
    "quadratic",
    "positivity",
]

CAUSAL_GATED = {"ipw", "moderation"}


class RegimeRequest(BaseModel):
    """A regime to evaluate by weighting, as named in the analysis block."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str
    rule: TailoringRule
    rescue_option: str
    normalized: bool = True
    cell_label: str | None = None


class AnalysisBlock(BaseModel):
    """Which estimators to run and their options."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    estimators: tuple[EstimatorName, ...] = ("contrasts",)
    contrast_factors: tuple[str, ...] | None = None
    outcome: Outcome = "y"
    multiplicity: Literal["none", "bonferroni"] = "none"
    variable: str | None = None
    aggregation: Aggregation = "mean_rate"
    direction: Direction = "below"
    week: int | None = None
    cutoff: float | None = None
    cutoff_grid: tuple[float, ...] = ()
    candidate_times: tuple[int, ...] = ()
    delta: float = 0.02
    cost_penalty: float | None = None
    fp_weight: float = 1.0
    fn_weight: float = 1.0
    bootstrap: int = 1000
    seed: int = 0
    moderation_variables: tuple[str, ...] = ()
    regimes: tuple[RegimeRequest, ...] = ()
    success_threshold: float | None = None

    @model_validator(mode="after")
    def _check(self) -> "AnalysisBlock":
        if self.bootstrap < 0:
            raise ConfigurationError("analysis.bootstrap must be >= 0")
        if self.delta < 0:
            raise ConfigurationError("analysis.delta must be >= 0")
        if "conditional_mean" in self.estimators and (
            self.variable is None or self.cutoff is None or self.week is None
        ):
            raise ConfigurationError(
                "analysis.conditional_mean needs variable, cutoff, and week"
            )
        if "elbow" in self.estimators and (
            self.variable is None or not self.candidate_times
        ):
            raise ConfigurationError(
                "analysis.elbow needs variable and candidate_times"
            )
        if "cutoff_scan" in self.estimators and (
            self.variable is None or not self.cutoff_grid or self.week is None
        ):
            raise ConfigurationError(
                "analysis.cutoff_scan needs variable, cutoff_grid, and week"
            )
        if "positivity" in self.estimators and (
            self.variable is None or not self.cutoff_grid
        ):
            raise ConfigurationError(
                "analysis.positivity needs variable and cutoff_grid"
            )
        if "ipw" in self.estimators and not self.regimes:
            raise ConfigurationError("analysis.ipw needs at least one regime")
        if "moderation" in self.estimators and not self.moderation_variables:
            raise ConfigurationError(
                "analysis.moderation needs moderation_variables"
            )
        return self


class McBlock(BaseModel):
    """Monte Carlo replication settings."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    replicates: int = 1000
    alpha: float = 0.05
    contrast_factor: str | None = None
    outcome: Outcome = "y"
    quadratic: bool = False
    regimes: tuple[NamedRegime, ...] = ()
    n_grid: tuple[int, ...] = ()
    target_power: float = 0.8
    pair: tuple[str, str] | None = None
    reference_n: int | None = None

    @model_validator(mode="after")
    def _check(self) -> "McBlock":
        if self.replicates < 1:
            raise ConfigurationError("mc.replicates must be >= 1")
        if not 0 < self.alpha < 1:
            raise ConfigurationError("mc.alpha must lie in (0, 1)")
        if not 0 < self.target_power < 1:
            raise ConfigurationError("mc.target_power must lie in (0, 1)")
        if self.n_grid and sorted(self.n_grid) != list(self.n_grid):
            raise ConfigurationError("mc.n_grid must be increasing")
        return self


def _design_variables(design: DesignSpec) -> set[str]:
    if design.type in RULE_BASED_TYPES:
        out: set[str] = set()
        for cell in rule_cells(design):
            out.update(cell.rule.variables)
        return out
    return set()


def _design_weeks(design: DesignSpec) -> set[int]:
    if design.type in RULE_BASED_TYPES:
        return {cell.rule.decision_week for cell in rule_cells(design)}
    if isinstance(design, SinglyRandomizedRescue):
        return {design.decision_week}
    if isinstance(design, UnrestrictedSmart):
        return set(design.times)
    return set()


class RunConfig(BaseModel):
    """Everything one run needs. `seed` (when set) overrides the scenario's
    own seed; the CLI flag overrides both."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    scenario: ScenarioParams
    design: DesignSpec
    analysis: AnalysisBlock = AnalysisBlock()
    mc: McBlock | None = None
    out_dir: str | None = None
    seed: int | None = None

    @model_validator(mode="after")
    def _cross_check(self) -> "RunConfig":
        known_vars = set(self.scenario.variables)
        known_rescues = set(self.scenario.rescue_options)
        horizon = self.scenario.horizon

        for var in sorted(_design_variables(self.design)):
            if var not in known_vars:
                raise ConfigurationError(
                    f"design references undefined variable {var!r} "
                    f"(scenario.variables: {sorted(known_vars)})"
                )
        for opt in spec_rescue_options(self.design):
            if opt not in known_rescues:
                raise ConfigurationError(
                    f"design.rescue_option {opt!r} is not defined in "
                    f"scenario.rescue_options ({sorted(known_rescues)})"
                )
        for week in sorted(_design_weeks(self.design)):
            if week > horizon:
                raise ConfigurationError(
                    f"design decision week {week} exceeds scenario.horizon {horizon}"
                )

        a = self.analysis
        for field, var in (
            ("analysis.variable", a.variable),
            *((f"analysis.moderation_variables[{i}]", v) for i, v in enumerate(a.moderation_variables)),
        ):
            if var is not None and var not in known_vars:
                raise ConfigurationError(f"{field} references undefined variable {var!r}")
        for i, reg in enumerate(a.regimes):
            if reg.rescue_option not in known_rescues:
                raise ConfigurationError(
                    f"analysis.regimes[{i}].rescue_option {reg.rescue_option!r} "
                    "is not defined in scenario.rescue_options"
                )
            for var in reg.rule.variables:
                if var not in known_vars:
                    raise ConfigurationError(
                        f"analysis.regimes[{i}] references undefined variable {var!r}"
                    )
            if reg.rule.decision_week > horizon:
                raise ConfigurationError(
                    f"analysis.regimes[{i}].rule.decision_week exceeds scenario.horizon"
                )
        if a.week is not None and a.week > horizon:
            raise ConfigurationError("analysis.week exceeds scenario.horizon")
        for t in a.candidate_times:
            if t > horizon:
                raise ConfigurationError(
                    f"analysis.candidate_times entry {t} exceeds scenario.horizon"
                )

        if self.mc is not None:
            m = self.mc
            for i, reg in enumerate(m.regimes):
                if reg.regime.rescue_option not in known_rescues:
                    raise ConfigurationError(
                        f"mc.regimes[{i}].regime.rescue_option is undefined"
                    )
                for var in reg.regime.rule.variables:
                    if var not in known_vars:
                        raise ConfigurationError(
                            f"mc.regimes[{i}] references undefined variable {var!r}"
                        )
            if m.contrast_factor is None and not m.regimes and not m.quadratic:
                raise ConfigurationError(
                    "mc block asks for nothing: set contrast_factor, regimes, "
                    "or quadratic"
                )
            if isinstance(self.design, InitialOnly) and m.contrast_factor:
                raise ConfigurationError(
                    "initial_only design has no randomized factors to contrast"
                )
        return self


def _format_validation_error(exc: ValidationError) -> str:
    lines = []
    for err in exc.errors():
        loc = ".".join(str(p) for p in err["loc"]) or "<root>"
        lines.append(f"{loc}: {err['msg']}")
    return "invalid configuration:\n  " + "\n  ".join(lines)


def parse_config(text: str) -> RunConfig:
    """Parse and validate a JSON run configuration."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config is not valid JSON: {exc}") from None
    try:
        return RunConfig.model_validate(raw)
    except ValidationError as exc:
        raise ConfigurationError(_format_validation_error(exc)) from None


def parse_analysis_block(text: str) -> AnalysisBlock:
    """Parse a standalone analysis block (secondary-analysis mode)."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"analysis block is not valid JSON: {exc}") from None
    if isinstance(raw, dict) and "analysis" in raw and set(raw) <= {"analysis"}:
        raw = raw["analysis"]
    try:
        return AnalysisBlock.model_validate(raw)
    except ValidationError as exc:
        raise ConfigurationError(_format_validation_error(exc)) from None
