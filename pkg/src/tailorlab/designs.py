"""Randomization engines: produce trial records from a potential-outcome
table under each supported experimental design.

Designs come in two families. Rule-based designs randomize components of
the tailoring rule (cutoff, decision time, observed variable, or their
cross) and then apply the assigned rule deterministically, so the rescue
action always equals the nonresponder indicator. Action-randomized
designs (singly randomized rescue, unrestricted SMART) assign the rescue
action itself at random, independent of the trajectories.

Assignment paths record every stochastic randomization actually applied
to a participant, with the probability used, which is what weighting
estimators need. Deterministic transitions (forced final stages, the
rule-driven rescue itself) are not randomizations and are not recorded.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Annotated, Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from . import seeds
from .errors import ConfigurationError, CoverageError
from .rules import (
    Aggregation,
    AtomicCondition,
    Direction,
    PathStep,
    TailoringRule,
    TrialRecord,
    nonresponder_mask,
)
from .scenario import PotentialOutcomeTable

FACTOR_ORDER = ("variable", "cutoff", "time", "rescue", "action")


class ConditionTemplate(BaseModel):
    """An atomic condition with the cutoff left open (supplied per arm)."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    variable: str
    aggregation: Aggregation = "mean_rate"
    direction: Direction = "below"

    def bind(self, cutoff: float) -> AtomicCondition:
        return AtomicCondition(
            variable=self.variable,
            aggregation=self.aggregation,
            direction=self.direction,
            cutoff=cutoff,
        )


class LeveledCondition(BaseModel):
    """Condition template with one cutoff value per cutoff level."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    variable: str
    aggregation: Aggregation = "mean_rate"
    direction: Direction = "below"
    cutoffs: tuple[float, ...]

    @model_validator(mode="after")
    def _check(self) -> "LeveledCondition":
        if not self.cutoffs:
            raise ConfigurationError("cutoffs must be nonempty")
        return self


class VariableArm(BaseModel):
    """A candidate tailoring-variable option: one or two leveled conditions."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str
    conditions: tuple[LeveledCondition, ...]

    @model_validator(mode="after")
    def _check(self) -> "VariableArm":
        if len(self.conditions) not in (1, 2):
            raise ConfigurationError("a variable arm takes one or two conditions")
        levels = {len(c.cutoffs) for c in self.conditions}
        if len(levels) != 1:
            raise ConfigurationError(
                "all conditions in a variable arm need the same number of cutoff levels"
            )
        return self

    @property
    def n_levels(self) -> int:
        return len(self.conditions[0].cutoffs)

    def rule(self, level: int, decision_week: int) -> TailoringRule:
        conds = tuple(
            AtomicCondition(
                variable=c.variable,
                aggregation=c.aggregation,
                direction=c.direction,
                cutoff=c.cutoffs[level],
            )
            for c in self.conditions
        )
        return TailoringRule(decision_week=decision_week, conditions=conds)


class NamedRule(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str
    rule: TailoringRule


def _check_times(times: tuple[int, ...]) -> None:
    if not times:
        raise ConfigurationError("times must be nonempty")
    if any(t < 1 for t in times):
        raise ConfigurationError("decision times must be >= 1")
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ConfigurationError("times must be strictly increasing")


def _check_prob(p: float, what: str) -> None:
    if not 0 < p < 1:
        raise ConfigurationError(f"{what} must lie strictly inside (0, 1), got {p}")


class UpfrontAllocation(BaseModel):
    """Assign the decision time at week 0, uniformly across times."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["upfront"] = "upfront"


class SequentialAllocation(BaseModel):
    """Randomize decide-now vs decide-later at each candidate time.

    `decide_probs` has one entry per time; the final entry must be 1
    (everyone still waiting decides at the last time).
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["sequential"] = "sequential"
    decide_probs: tuple[float, ...]

    @model_validator(mode="after")
    def _check(self) -> "SequentialAllocation":
        if not self.decide_probs:
            raise ConfigurationError("decide_probs must be nonempty")
        for p in self.decide_probs[:-1]:
            _check_prob(p, "stage decide probability")
        if self.decide_probs[-1] != 1.0:
            raise ConfigurationError("the final stage decide probability must be 1")
        return self


class CutoffTrial(BaseModel):
    """Randomize the cutoff of one condition; fixed decision week."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    type: Literal["cutoff_trial"] = "cutoff_trial"
    condition: ConditionTemplate
    cutoffs: tuple[float, ...]
    decision_week: int
    rescue_option: str
    block_size: int | None = None

    @model_validator(mode="after")
    def _check(self) -> "CutoffTrial":
        if not self.cutoffs:
            raise ConfigurationError("cutoffs must be nonempty")
        return self


class DecisionTimeTrial(BaseModel):
    """Randomize the decision time of a fixed rule."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    type: Literal["decision_time_trial"] = "decision_time_trial"
    condition: AtomicCondition
    times: tuple[int, ...]
    allocation: UpfrontAllocation | SequentialAllocation = UpfrontAllocation()
    rescue_option: str
    block_size: int | None = None

    @model_validator(mode="after")
    def _check(self) -> "DecisionTimeTrial":
        _check_times(self.times)
        if isinstance(self.allocation, SequentialAllocation):
            if len(self.allocation.decide_probs) != len(self.times):
                raise ConfigurationError("decide_probs must have one entry per time")
            if self.block_size is not None:
                raise ConfigurationError(
                    "permuted blocks apply to upfront allocation only"
                )
        return self


class FactorialCutoffTime(BaseModel):
    """Cross cutoffs with decision times; one upfront randomization."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    type: Literal["factorial_cutoff_time"] = "factorial_cutoff_time"
    condition: ConditionTemplate
    cutoffs: tuple[float, ...]
    times: tuple[int, ...]
    rescue_option: str
    block_size: int | None = None

    @model_validator(mode="after")
    def _check(self) -> "FactorialCutoffTime":
        if not self.cutoffs:
            raise ConfigurationError("cutoffs must be nonempty")
        _check_times(self.times)
        return self


class HybridFactorialSmart(BaseModel):
    """Factorial on (cutoff, time) upfront, then re-randomize nonresponders
    across rescue options."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    type: Literal["hybrid_factorial_smart"] = "hybrid_factorial_smart"
    condition: ConditionTemplate
    cutoffs: tuple[float, ...]
    times: tuple[int, ...]
    rescue_options: tuple[str, ...]
    block_size: int | None = None

    @model_validator(mode="after")
    def _check(self) -> "HybridFactorialSmart":
        if not self.cutoffs:
            raise ConfigurationError("cutoffs must be nonempty")
        _check_times(self.times)
        if len(self.rescue_options) < 1:
            raise ConfigurationError("at least one rescue option is required")
        if len(set(self.rescue_options)) != len(self.rescue_options):
            raise ConfigurationError("rescue options must be distinct")
        return self


class VariableTrial(BaseModel):
    """Randomize among named tailoring rules (candidate observed variables)."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    type: Literal["variable_trial"] = "variable_trial"
    rules: tuple[NamedRule, ...]
    rescue_option: str
    block_size: int | None = None

    @model_validator(mode="after")
    def _check(self) -> "VariableTrial":
        if not self.rules:
            raise ConfigurationError("rules must be nonempty")
        names = [r.name for r in self.rules]
        if len(set(names)) != len(names):
            raise ConfigurationError("rule names must be distinct")
        return self


class SinglyRandomizedRescue(BaseModel):
    """Randomize the rescue action itself at one week, independent of the
    trajectories."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    type: Literal["singly_randomized_rescue"] = "singly_randomized_rescue"
    decision_week: int
    probability: float = 0.5
    rescue_option: str

    @model_validator(mode="after")
    def _check(self) -> "SinglyRandomizedRescue":
        _check_prob(self.probability, "rescue probability")
        if self.decision_week < 1:
            raise ConfigurationError("decision_week must be >= 1")
        return self


class UnrestrictedSmart(BaseModel):
    """Repeatedly randomize rescue-now vs wait at each time, regardless of
    response status; rescued participants leave the randomization pool."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    type: Literal["unrestricted_smart"] = "unrestricted_smart"
    times: tuple[int, ...]
    probabilities: tuple[float, ...]
    rescue_option: str

    @model_validator(mode="before")
    @classmethod
    def _broadcast(cls, data):
        if isinstance(data, dict):
            p = data.get("probabilities")
            if isinstance(p, (int, float)):
                data = dict(data)
                data["probabilities"] = (float(p),) * len(tuple(data.get("times", ())))
        return data

    @model_validator(mode="after")
    def _check(self) -> "UnrestrictedSmart":
        _check_times(self.times)
        if len(self.probabilities) != len(self.times):
            raise ConfigurationError("one rescue probability per time (or a single one)")
        for p in self.probabilities:
            _check_prob(p, "rescue probability")
        return self


class FullCross(BaseModel):
    """Cross candidate variables x cutoff levels x decision times."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    type: Literal["full_cross"] = "full_cross"
    variables: tuple[VariableArm, ...]
    times: tuple[int, ...]
    rescue_option: str
    level_names: tuple[str, ...] | None = None
    block_size: int | None = None

    @model_validator(mode="after")
    def _check(self) -> "FullCross":
        if not self.variables:
            raise ConfigurationError("variables must be nonempty")
        _check_times(self.times)
        levels = {arm.n_levels for arm in self.variables}
        if len(levels) != 1:
            raise ConfigurationError(
                "all variable arms need the same number of cutoff levels"
            )
        if self.level_names is not None and len(self.level_names) != levels.pop():
            raise ConfigurationError("level_names must match the number of levels")
        return self

    @property
    def cutoff_labels(self) -> tuple[str, ...]:
        if self.level_names is not None:
            return self.level_names
        return tuple(f"level{i + 1}" for i in range(self.variables[0].n_levels))


class InitialOnly(BaseModel):
    """No randomization: observe everyone under initial treatment only.

    Produces the secondary-analysis datasets the correlational estimators
    expect (prognosis under initial treatment, nobody rescued).
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    type: Literal["initial_only"] = "initial_only"


DesignSpec = Annotated[
    Union[
        CutoffTrial,
        DecisionTimeTrial,
        FactorialCutoffTime,
        HybridFactorialSmart,
        VariableTrial,
        SinglyRandomizedRescue,
        UnrestrictedSmart,
        FullCross,
        InitialOnly,
    ],
    Field(discriminator="type"),
]

RULE_BASED_TYPES = frozenset(
    {
        "cutoff_trial",
        "decision_time_trial",
        "factorial_cutoff_time",
        "hybrid_factorial_smart",
        "variable_trial",
        "full_cross",
    }
)


def extend_preset(
    variable: str = "heavy_drinking_days",
    decision_week: int = 4,
    rescue_options: tuple[str, str] = ("moderate_rescue", "intense_rescue"),
) -> HybridFactorialSmart:
    """Hybrid SMART with one decision time, cumulative heavy-drinking-day
    cutoffs {2, 5} (nonresponse = strictly more than the cutoff), and two
    rescue options for nonresponders."""
    return HybridFactorialSmart(
        condition=ConditionTemplate(
            variable=variable, aggregation="cumulative_sum", direction="above"
        ),
        cutoffs=(2.0, 5.0),
        times=(decision_week,),
        rescue_options=rescue_options,
    )


def sequential_alloc_probs(
    times: tuple[int, ...], target: tuple[float, ...]
) -> tuple[float, ...]:
    """Stage-wise decide probabilities inducing the target marginal
    allocation across decision times.

    Solves p_k = target_k / (mass remaining at stage k), with the final
    stage forced to 1.
    """
    _check_times(tuple(times))
    if len(target) != len(times):
        raise ConfigurationError("target needs one entry per time")
    if any(t <= 0 for t in target):
        raise ConfigurationError("target allocations must be positive")
    if abs(sum(target) - 1.0) > 1e-9:
        raise ConfigurationError("target allocations must sum to 1")
    probs: list[float] = []
    remaining = 1.0
    for k, share in enumerate(target):
        if remaining <= 1e-12:
            raise ConfigurationError("infeasible target: no mass remaining")
        p = share / remaining
        if p > 1 + 1e-9:
            raise ConfigurationError("infeasible target: stage probability above 1")
        if k == len(target) - 1:
            p = 1.0
        probs.append(min(p, 1.0))
        remaining -= share
    return tuple(probs)


def marginal_allocation(decide_probs: tuple[float, ...]) -> tuple[float, ...]:
    """Marginal share of participants deciding at each stage."""
    shares: list[float] = []
    remaining = 1.0
    for p in decide_probs:
        shares.append(remaining * p)
        remaining *= 1.0 - p
    return tuple(shares)


def permuted_block_assign(
    n: int, arms: int, block_size: int, rng: np.random.Generator | int
) -> np.ndarray:
    """Permuted-block arm labels 0..arms-1 for n participants.

    Every full block of `block_size` contains exactly block_size/arms of
    each arm; a trailing partial block is a truncated permutation of a
    fresh block, so its imbalance is bounded by the block composition.
    """
    if arms < 1:
        raise ConfigurationError("need at least one arm")
    if block_size < 1 or block_size % arms != 0:
        raise ConfigurationError(
            f"block size {block_size} must be a positive multiple of {arms} arms"
        )
    if isinstance(rng, (int, np.integer)):
        rng = seeds.substream(int(rng), seeds.DESIGN)
    base = np.repeat(np.arange(arms), block_size // arms)
    blocks = []
    for _ in range((n + block_size - 1) // block_size):
        blocks.append(base[rng.permutation(block_size)])
    return np.concatenate(blocks)[:n]


def _uniform_cells(n: int, k: int, rng: np.random.Generator) -> np.ndarray:
    # Inverse-CDF draw: floor(U * k), never rejected.
    return np.minimum((rng.random(n) * k).astype(int), k - 1)


@dataclass(frozen=True)
class Cell:
    """One randomization cell of a rule-based design: factor levels plus
    the tailoring rule the cell applies."""

    arms: dict[str, str]
    rule: TailoringRule

    @property
    def label(self) -> str:
        return "+".join(f"{f}={self.arms[f]}" for f in FACTOR_ORDER if f in self.arms)


def _format_level(value: float) -> str:
    return f"{value:g}"


def rule_cells(spec: DesignSpec) -> list[Cell]:
    """Enumerate the randomization cells of a rule-based design, in
    assignment-index order. Raises for action-randomized designs."""
    if isinstance(spec, CutoffTrial):
        return [
            Cell(
                {"cutoff": _format_level(c)},
                TailoringRule(
                    decision_week=spec.decision_week,
                    conditions=(spec.condition.bind(c),),
                ),
            )
            for c in spec.cutoffs
        ]
    if isinstance(spec, DecisionTimeTrial):
        return [
            Cell(
                {"time": str(t)},
                TailoringRule(decision_week=t, conditions=(spec.condition,)),
            )
            for t in spec.times
        ]
    if isinstance(spec, (FactorialCutoffTime, HybridFactorialSmart)):
        return [
            Cell(
                {"cutoff": _format_level(c), "time": str(t)},
                TailoringRule(decision_week=t, conditions=(spec.condition.bind(c),)),
            )
            for c in spec.cutoffs
            for t in spec.times
        ]
    if isinstance(spec, VariableTrial):
        return [Cell({"variable": nr.name}, nr.rule) for nr in spec.rules]
    if isinstance(spec, FullCross):
        return [
            Cell(
                {
                    "variable": arm.name,
                    "cutoff": spec.cutoff_labels[lv],
                    "time": str(t),
                },
                arm.rule(lv, t),
            )
            for arm in spec.variables
            for lv in range(arm.n_levels)
            for t in spec.times
        ]
    raise ConfigurationError(
        f"{type(spec).__name__} does not randomize tailoring rules"
    )


def spec_rescue_options(spec: DesignSpec) -> tuple[str, ...]:
    """Rescue options a design can deliver."""
    if isinstance(spec, HybridFactorialSmart):
        return spec.rescue_options
    if isinstance(spec, InitialOnly):
        return ()
    return (spec.rescue_option,)


def _check_coverage(table: PotentialOutcomeTable, weeks: set[int], options: set[str]) -> None:
    for week in weeks:
        if not 1 <= week <= table.params.horizon:
            raise CoverageError(
                f"decision week {week} outside horizon 1..{table.params.horizon}"
            )
    for opt in options:
        if opt not in table.params.rescue_options:
            raise CoverageError(f"rescue option {opt!r} not in scenario")


def _records_from_rule_cells(
    table: PotentialOutcomeTable,
    cells: list[Cell],
    cell_idx: np.ndarray,
    paths: list[list[PathStep]],
    rescue_options: tuple[str, ...],
    rng: np.random.Generator,
) -> list[TrialRecord]:
    """Shared tail of every rule-based design: classify per assigned rule,
    deliver rescue to nonresponders at the rule's week, read outcomes."""
    n = table.n
    kappa = table.params.cost_penalty
    nonresp = np.zeros(n, dtype=bool)
    week_of = np.zeros(n, dtype=int)
    for ci, cell in enumerate(cells):
        m = cell_idx == ci
        if not m.any():
            continue
        sub = {
            var: table.trajectories[var][m]
            for var in cell.rule.variables
        }
        nonresp[m] = nonresponder_mask(sub, cell.rule)
        week_of[m] = cell.rule.decision_week

    # Rescue option per nonresponder: fixed, or re-randomized when the
    # design carries several options.
    opt_idx = np.zeros(n, dtype=int)
    opt_prob = 1.0 / len(rescue_options)
    if len(rescue_options) > 1:
        opt_idx = _uniform_cells(n, len(rescue_options), rng)

    y = table.y_no_rescue.copy()
    for oi, opt in enumerate(rescue_options):
        for week in sorted(set(week_of[nonresp & (opt_idx == oi)].tolist())):
            m = nonresp & (opt_idx == oi) & (week_of == week)
            y[m] = table.y_rescue(opt, week)[m]

    y_bin = table.y_bin(y)
    records: list[TrialRecord] = []
    for i in range(n):
        cell = cells[cell_idx[i]]
        rescued = bool(nonresp[i])
        arms = dict(cell.arms)
        path = list(paths[i])
        option: str | None = None
        rescue_week: int | None = None
        if rescued:
            option = rescue_options[opt_idx[i]]
            rescue_week = int(week_of[i])
            if len(rescue_options) > 1:
                arms["rescue"] = option
                path.append(PathStep(rescue_week, f"rescue={option}", opt_prob))
        records.append(
            TrialRecord(
                participant_id=i,
                arms=arms,
                trajectory=table.trajectory_of(i),
                response=0 if rescued else 1,
                classification_week=int(week_of[i]),
                rescued=int(rescued),
                rescue_week=rescue_week,
                rescue_option=option,
                y=float(y[i]),
                y_bin=int(y_bin[i]),
                y_adj=float(y[i] - kappa * rescued),
                path=tuple(path),
            )
        )
    return records


def _upfront_paths(
    cells: list[Cell], cell_idx: np.ndarray, k: int
) -> list[list[PathStep]]:
    if k <= 1:
        return [[] for _ in range(len(cell_idx))]
    p = 1.0 / k
    steps = [PathStep(0, cell.label, p) for cell in cells]
    return [[steps[ci]] for ci in cell_idx]


def _assign_upfront(
    n: int, k: int, block_size: int | None, rng: np.random.Generator
) -> np.ndarray:
    if block_size is not None:
        return permuted_block_assign(n, k, block_size, rng)
    return _uniform_cells(n, k, rng)


def run_design(
    table: PotentialOutcomeTable, spec: DesignSpec, seed: int | np.random.Generator
) -> list[TrialRecord]:
    """Run one trial under `spec` on the generated population.

    Deterministic given (table, spec, seed). Every record's outcome is the
    potential-outcome entry matching its realized action sequence.
    """
    rng = seed if isinstance(seed, np.random.Generator) else seeds.substream(int(seed), seeds.DESIGN)
    n = table.n

    if spec.type in RULE_BASED_TYPES:
        cells = rule_cells(spec)
        options = spec_rescue_options(spec)
        _check_coverage(
            table, {c.rule.decision_week for c in cells}, set(options)
        )
        if isinstance(spec, DecisionTimeTrial) and isinstance(
            spec.allocation, SequentialAllocation
        ):
            probs = spec.allocation.decide_probs
            draws = rng.random((n, len(cells)))
            cell_idx = np.zeros(n, dtype=int)
            paths: list[list[PathStep]] = [[] for _ in range(n)]
            waiting = np.ones(n, dtype=bool)
            for j, p in enumerate(probs):
                decide = waiting & (draws[:, j] < p)
                week = spec.times[j]
                for i in np.flatnonzero(waiting):
                    if decide[i]:
                        if p < 1.0:
                            paths[i].append(PathStep(week, "decide", p))
                    else:
                        paths[i].append(PathStep(week, "wait", 1.0 - p))
                cell_idx[decide] = j
                waiting &= ~decide
        else:
            cell_idx = _assign_upfront(n, len(cells), spec.block_size, rng)
            paths = _upfront_paths(cells, cell_idx, len(cells))
        return _records_from_rule_cells(table, cells, cell_idx, paths, options, rng)

    if isinstance(spec, SinglyRandomizedRescue):
        _check_coverage(table, {spec.decision_week}, {spec.rescue_option})
        return _run_singly_randomized(table, spec, rng)

    if isinstance(spec, UnrestrictedSmart):
        _check_coverage(table, set(spec.times), {spec.rescue_option})
        return _run_unrestricted_smart(table, spec, rng)

    if isinstance(spec, InitialOnly):
        return _run_initial_only(table)

    raise ConfigurationError(f"unknown design spec {type(spec).__name__}")


def _run_singly_randomized(
    table: PotentialOutcomeTable, spec: SinglyRandomizedRescue, rng: np.random.Generator
) -> list[TrialRecord]:
    n = table.n
    kappa = table.params.cost_penalty
    week, p = spec.decision_week, spec.probability
    rescued = rng.random(n) < p
    y = np.where(rescued, table.y_rescue(spec.rescue_option, week), table.y_no_rescue)
    y_bin = table.y_bin(y)
    records = []
    for i in range(n):
        a = bool(rescued[i])
        records.append(
            TrialRecord(
                participant_id=i,
                arms={"action": "rescue" if a else "none"},
                trajectory=table.trajectory_of(i),
                response=None,
                classification_week=None,
                rescued=int(a),
                rescue_week=week if a else None,
                rescue_option=spec.rescue_option if a else None,
                y=float(y[i]),
                y_bin=int(y_bin[i]),
                y_adj=float(y[i] - kappa * a),
                path=(PathStep(week, "rescue" if a else "wait", p if a else 1.0 - p),),
            )
        )
    return records


def _run_unrestricted_smart(
    table: PotentialOutcomeTable, spec: UnrestrictedSmart, rng: np.random.Generator
) -> list[TrialRecord]:
    n = table.n
    kappa = table.params.cost_penalty
    draws = rng.random((n, len(spec.times)))
    rescue_week = np.zeros(n, dtype=int)  # 0 = never rescued
    paths: list[list[PathStep]] = [[] for _ in range(n)]
    active = np.ones(n, dtype=bool)
    for j, (week, p) in enumerate(zip(spec.times, spec.probabilities)):
        go = draws[:, j] < p
        for i in np.flatnonzero(active):
            if go[i]:
                paths[i].append(PathStep(week, "rescue", p))
                rescue_week[i] = week
            else:
                paths[i].append(PathStep(week, "wait", 1.0 - p))
        active &= ~go

    y = table.y_no_rescue.copy()
    for week in sorted(set(rescue_week[rescue_week > 0].tolist())):
        m = rescue_week == week
        y[m] = table.y_rescue(spec.rescue_option, week)[m]
    y_bin = table.y_bin(y)

    records = []
    for i in range(n):
        a = rescue_week[i] > 0
        records.append(
            TrialRecord(
                participant_id=i,
                arms={},
                trajectory=table.trajectory_of(i),
                response=None,
                classification_week=None,
                rescued=int(a),
                rescue_week=int(rescue_week[i]) if a else None,
                rescue_option=spec.rescue_option if a else None,
                y=float(y[i]),
                y_bin=int(y_bin[i]),
                y_adj=float(y[i] - kappa * a),
                path=tuple(paths[i]),
            )
        )
    return records


def _run_initial_only(table: PotentialOutcomeTable) -> list[TrialRecord]:
    y = table.y_no_rescue
    y_bin = table.y_bin(y)
    return [
        TrialRecord(
            participant_id=i,
            arms={},
            trajectory=table.trajectory_of(i),
            response=None,
            classification_week=None,
            rescued=0,
            rescue_week=None,
            rescue_option=None,
            y=float(y[i]),
            y_bin=int(y_bin[i]),
            y_adj=float(y[i]),
            path=(),
        )
        for i in range(table.n)
    ]
