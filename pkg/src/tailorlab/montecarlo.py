"""Replicated scenario x design x analysis pipelines.

Estimates rejection rates (power or type-I error), estimator bias against
the plug-in regime truth, decision-time-optimum recovery, and
effective-sample-size diagnostics (nonresponder counts per arm, which
drive the power of any rescue-option comparison).

Each replicate draws a fresh population and trial from streams keyed by
(master seed, replicate index), so reports are pure functions of the plan
and identical for any thread count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from . import seeds
from .analysis import arm_contrasts, fit_quadratic_time, ipw_regime_value, _ols
from .designs import (
    Cell,
    DesignSpec,
    RULE_BASED_TYPES,
    rule_cells,
    run_design,
    spec_rescue_options,
)
from .errors import ConfigurationError, TailorlabError
from .rules import AdaptiveIntervention, TrialRecord
from .scenario import ScenarioParams, gen_population, regime_truth

Outcome = Literal["y", "y_bin", "y_adj"]


class NamedRegime(BaseModel):
    """A regime to evaluate by weighting in each replicate, against its
    plug-in truth."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str
    regime: AdaptiveIntervention
    normalized: bool = True


class McPlan(BaseModel):
    """One Monte Carlo study: world, trial, what to estimate, how often."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    scenario: ScenarioParams
    design: DesignSpec
    contrast_factor: str | None = None
    outcome: Outcome = "y"
    quadratic: bool = False
    regimes: tuple[NamedRegime, ...] = ()
    replicates: int = 1000
    alpha: float = 0.05
    seed: int = 0
    reference_n: int | None = None

    @model_validator(mode="after")
    def _check(self) -> "McPlan":
        if self.replicates < 1:
            raise ConfigurationError("replicates must be >= 1")
        if not 0 < self.alpha < 1:
            raise ConfigurationError("alpha must lie in (0, 1)")
        if self.contrast_factor is None and not self.regimes and not self.quadratic:
            raise ConfigurationError(
                "plan asks for nothing: set contrast_factor, regimes, or quadratic"
            )
        return self


@dataclass(frozen=True)
class McContrast:
    arm_a: str
    arm_b: str
    rejection_rate: float
    rejection_se: float
    mean_estimate: float
    estimate_se: float
    mean_truth: float | None
    bias: float | None


@dataclass(frozen=True)
class McRegime:
    name: str
    mean_estimate: float
    estimate_se: float
    mean_truth: float
    bias: float


@dataclass(frozen=True)
class McOptimum:
    mean: float
    sd: float
    reference: float | None
    bias: float | None
    mse: float | None


@dataclass(frozen=True)
class McArm:
    label: str
    mean_n: float
    mean_nonresponders: float
    sd_nonresponders: float
    mean_proportion: float
    unpowered: bool


@dataclass(frozen=True)
class McReport:
    replicates: int
    alpha: float
    contrasts: tuple[McContrast, ...]
    regimes: tuple[McRegime, ...]
    optimum: McOptimum | None
    arms: tuple[McArm, ...]
    superpopulation_truths: tuple[tuple[str, float], ...]


def _level_truth(
    table, cells: list[Cell], options: tuple[str, ...], factor: str, level: str,
    cost_adjusted: bool,
) -> float:
    """Plug-in value of one factor level: equal-weight average over the
    level's cells and, when several rescue options are re-randomized,
    over the options."""
    values = []
    for cell in cells:
        if cell.arms.get(factor) != level:
            continue
        for opt in options:
            adi = AdaptiveIntervention(rule=cell.rule, rescue_option=opt)
            values.append(regime_truth(table, adi, cost_adjusted=cost_adjusted))
    if not values:
        raise ConfigurationError(f"no design cell has {factor}={level}")
    return float(np.mean(values))


def _nonresponder_groups(records: list[TrialRecord]) -> dict[str, tuple[int, int]]:
    """label -> (arm n, nonresponder count), grouped by upfront factors and,
    where present, by rescue option arm."""
    groups: dict[str, tuple[int, int]] = {}
    for r in records:
        upfront = {k: v for k, v in r.arms.items() if k != "rescue"}
        label = "+".join(f"{k}={v}" for k, v in sorted(upfront.items())) or "all"
        n, k = groups.get(label, (0, 0))
        groups[label] = (n + 1, k + (1 - (r.response if r.response is not None else 1)))
        if "rescue" in r.arms:
            rlabel = f"rescue={r.arms['rescue']}"
            n, k = groups.get(rlabel, (0, 0))
            groups[rlabel] = (n + 1, k + 1)
    return groups


def effective_sample_report(
    replicate_records: list[list[TrialRecord]],
) -> tuple[McArm, ...]:
    """Nonresponder counts per arm, aggregated across replicates.

    Arms whose nonresponder pool is empty on average are flagged
    unpowered: nothing downstream of nonresponse (rescue comparisons)
    can be learned there.
    """
    if not replicate_records:
        raise ConfigurationError("no replicates given")
    for records in replicate_records:
        if any(r.response is None for r in records):
            raise ConfigurationError(
                "effective_sample_report applies to rule-based designs only"
            )
    per_label: dict[str, list[tuple[int, int]]] = {}
    for records in replicate_records:
        for label, pair in _nonresponder_groups(records).items():
            per_label.setdefault(label, []).append(pair)
    arms = []
    for label in sorted(per_label):
        pairs = per_label[label]
        ns = np.array([p[0] for p in pairs], dtype=float)
        ks = np.array([p[1] for p in pairs], dtype=float)
        arms.append(
            McArm(
                label=label,
                mean_n=float(ns.mean()),
                mean_nonresponders=float(ks.mean()),
                sd_nonresponders=float(ks.std(ddof=1)) if len(ks) > 1 else 0.0,
                mean_proportion=float((ks / ns).mean()),
                unpowered=bool(ks.mean() == 0),
            )
        )
    return tuple(arms)


def _replicate(plan: McPlan, index: int) -> dict:
    pop_rng = seeds.substream(plan.seed, seeds.REPLICATE, index, 0)
    design_rng = seeds.substream(plan.seed, seeds.REPLICATE, index, 1)
    table = gen_population(plan.scenario, rng=pop_rng)
    records = run_design(table, plan.design, design_rng)
    out: dict = {}

    cost_adjusted = plan.outcome == "y_adj"
    rule_based = plan.design.type in RULE_BASED_TYPES
    if plan.contrast_factor is not None:
        ct = arm_contrasts(records, [plan.contrast_factor], outcome=plan.outcome)
        cells = rule_cells(plan.design) if rule_based else None
        options = spec_rescue_options(plan.design)
        pairs = {}
        truths: dict[str, float] = {}
        if cells is not None and plan.outcome != "y_bin":
            levels = {a.label for a in ct.arms}
            truths = {
                lv: _level_truth(table, cells, options, plan.contrast_factor, lv, cost_adjusted)
                for lv in levels
            }
        for pc in ct.pairs:
            truth = (
                truths[pc.arm_a] - truths[pc.arm_b] if pc.arm_a in truths else None
            )
            pairs[(pc.arm_a, pc.arm_b)] = (pc.difference, pc.p_value, truth)
        out["pairs"] = pairs

    if plan.regimes:
        vals = {}
        for nr in plan.regimes:
            rv = ipw_regime_value(
                records, nr.regime, normalized=nr.normalized, n_bootstrap=0
            )
            vals[nr.name] = (
                rv.estimate,
                regime_truth(table, nr.regime, cost_adjusted=cost_adjusted),
            )
        out["regimes"] = vals

    if plan.quadratic:
        fit = fit_quadratic_time(records, n_bootstrap=0)
        out["optimum"] = fit.optimum

    if rule_based:
        out["nonresponders"] = _nonresponder_groups(records)
    return out


def _reference_optimum(plan: McPlan) -> float | None:
    """Population analogue of the estimator's target: argmax of the
    quadratic projection of per-time regime truths, computed on a large
    reference population."""
    if not plan.quadratic or plan.design.type not in RULE_BASED_TYPES:
        return None
    cells = rule_cells(plan.design)
    times = sorted({float(c.rule.decision_week) for c in cells})
    if len(times) < 3:
        return None
    n_ref = plan.reference_n or 100_000
    ref_params = plan.scenario.model_copy(update={"n_participants": n_ref})
    table = gen_population(ref_params, rng=seeds.substream(plan.seed, seeds.POPULATION, 9))
    options = spec_rescue_options(plan.design)
    truths = {
        t: _level_truth(
            table, cells, options, "time", f"{int(t)}", plan.outcome == "y_adj"
        )
        for t in times
    }
    tv = np.array(times)
    x = np.column_stack([np.ones_like(tv), tv, tv**2])
    beta, _, _ = _ols(x, np.array([truths[t] for t in times]))
    b0, b1, b2 = (float(v) for v in beta)
    if b2 < 0:
        vertex = -b1 / (2 * b2)
        if tv.min() <= vertex <= tv.max():
            return vertex
    return float(max(truths, key=lambda t: (truths[t], -t)))


def run_replicates(plan: McPlan, threads: int = 1) -> McReport:
    """Run the plan's replicates and aggregate.

    A replicate that raises aborts the whole run with the replicate index
    and seed so the failure can be reproduced in isolation.
    """
    results: list[dict | None] = [None] * plan.replicates

    def one(i: int) -> tuple[int, dict]:
        try:
            return i, _replicate(plan, i)
        except TailorlabError as exc:
            raise type(exc)(
                f"replicate {i} (master seed {plan.seed}): {exc}"
            ) from exc

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for i, res in pool.map(one, range(plan.replicates)):
                results[i] = res
    else:
        for i in range(plan.replicates):
            results[i] = one(i)[1]

    r_count = plan.replicates
    contrasts: list[McContrast] = []
    if plan.contrast_factor is not None:
        keys: list[tuple[str, str]] = []
        for res in results:
            for key in res["pairs"]:
                if key not in keys:
                    keys.append(key)
        for a, b in keys:
            rows = [res["pairs"][(a, b)] for res in results if (a, b) in res["pairs"]]
            diffs = np.array([r[0] for r in rows])
            rejects = np.array([r[1] < plan.alpha for r in rows], dtype=float)
            truths = [r[2] for r in rows]
            rate = float(rejects.mean())
            have_truth = all(t is not None for t in truths)
            mean_truth = float(np.mean([t for t in truths])) if have_truth else None
            contrasts.append(
                McContrast(
                    arm_a=a,
                    arm_b=b,
                    rejection_rate=rate,
                    rejection_se=float(np.sqrt(rate * (1 - rate) / len(rows))),
                    mean_estimate=float(diffs.mean()),
                    estimate_se=float(diffs.std(ddof=1) / np.sqrt(len(diffs)))
                    if len(diffs) > 1
                    else 0.0,
                    mean_truth=mean_truth,
                    bias=float(diffs.mean() - mean_truth) if have_truth else None,
                )
            )

    regimes: list[McRegime] = []
    for nr in plan.regimes:
        ests = np.array([res["regimes"][nr.name][0] for res in results])
        truths = np.array([res["regimes"][nr.name][1] for res in results])
        regimes.append(
            McRegime(
                name=nr.name,
                mean_estimate=float(ests.mean()),
                estimate_se=float(ests.std(ddof=1) / np.sqrt(r_count))
                if r_count > 1
                else 0.0,
                mean_truth=float(truths.mean()),
                bias=float(ests.mean() - truths.mean()),
            )
        )

    optimum = None
    if plan.quadratic:
        vals = np.array(
            [res["optimum"] for res in results if res["optimum"] is not None]
        )
        reference = _reference_optimum(plan)
        if len(vals):
            bias = float(vals.mean() - reference) if reference is not None else None
            mse = (
                float(np.mean((vals - reference) ** 2))
                if reference is not None
                else None
            )
            optimum = McOptimum(
                mean=float(vals.mean()),
                sd=float(vals.std(ddof=1)) if len(vals) > 1 else 0.0,
                reference=reference,
                bias=bias,
                mse=mse,
            )

    arms: tuple[McArm, ...] = ()
    if plan.design.type in RULE_BASED_TYPES:
        per_label: dict[str, list[tuple[int, int]]] = {}
        for res in results:
            for label, pair in res["nonresponders"].items():
                per_label.setdefault(label, []).append(pair)
        arm_rows = []
        for label in sorted(per_label):
            pairs = per_label[label]
            ns = np.array([p[0] for p in pairs], dtype=float)
            ks = np.array([p[1] for p in pairs], dtype=float)
            arm_rows.append(
                McArm(
                    label=label,
                    mean_n=float(ns.mean()),
                    mean_nonresponders=float(ks.mean()),
                    sd_nonresponders=float(ks.std(ddof=1)) if len(ks) > 1 else 0.0,
                    mean_proportion=float((ks / ns).mean()),
                    unpowered=bool(ks.mean() == 0),
                )
            )
        arms = tuple(arm_rows)

    super_truths: tuple[tuple[str, float], ...] = ()
    if (
        plan.reference_n
        and plan.contrast_factor is not None
        and plan.design.type in RULE_BASED_TYPES
        and plan.outcome != "y_bin"
    ):
        ref_params = plan.scenario.model_copy(
            update={"n_participants": plan.reference_n}
        )
        ref_table = gen_population(
            ref_params, rng=seeds.substream(plan.seed, seeds.POPULATION, 8)
        )
        cells = rule_cells(plan.design)
        options = spec_rescue_options(plan.design)
        levels = sorted(
            {c.arms[plan.contrast_factor] for c in cells if plan.contrast_factor in c.arms}
        )
        super_truths = tuple(
            (
                lv,
                _level_truth(
                    ref_table, cells, options, plan.contrast_factor, lv,
                    plan.outcome == "y_adj",
                ),
            )
            for lv in levels
        )

    return McReport(
        replicates=r_count,
        alpha=plan.alpha,
        contrasts=tuple(contrasts),
        regimes=tuple(regimes),
        optimum=optimum,
        arms=arms,
        superpopulation_truths=super_truths,
    )


@dataclass(frozen=True)
class PowerCurvePoint:
    n: int
    power: float
    mc_se: float


@dataclass(frozen=True)
class PowerSearchResult:
    target_power: float
    pair: tuple[str, str]
    curve: tuple[PowerCurvePoint, ...]
    chosen_n: int | None
    status: str  # "found" or "not_found"


def power_search(
    plan: McPlan,
    target_power: float,
    n_grid: list[int],
    pair: tuple[str, str] | None = None,
    threads: int = 1,
) -> PowerSearchResult:
    """Smallest population size on the grid whose estimated power for the
    primary contrast reaches the target, plus the whole curve."""
    if not n_grid or sorted(n_grid) != list(n_grid):
        raise ConfigurationError("n_grid must be nonempty and increasing")
    if not 0 < target_power < 1:
        raise ConfigurationError("target power must lie in (0, 1)")
    if plan.contrast_factor is None:
        raise ConfigurationError("power_search needs a contrast_factor in the plan")
    curve: list[PowerCurvePoint] = []
    chosen: int | None = None
    resolved_pair: tuple[str, str] | None = pair
    for n in n_grid:
        sub = plan.model_copy(
            update={"scenario": plan.scenario.model_copy(update={"n_participants": n})}
        )
        report = run_replicates(sub, threads=threads)
        if not report.contrasts:
            raise ConfigurationError("plan produced no contrasts")
        if resolved_pair is None:
            resolved_pair = (report.contrasts[0].arm_a, report.contrasts[0].arm_b)
        match = [
            c
            for c in report.contrasts
            if (c.arm_a, c.arm_b) == resolved_pair or (c.arm_b, c.arm_a) == resolved_pair
        ]
        if not match:
            raise ConfigurationError(f"contrast pair {resolved_pair} not in report")
        point = PowerCurvePoint(n=n, power=match[0].rejection_rate, mc_se=match[0].rejection_se)
        curve.append(point)
        if chosen is None and point.power >= target_power:
            chosen = n
    return PowerSearchResult(
        target_power=target_power,
        pair=resolved_pair,
        curve=tuple(curve),
        chosen_n=chosen,
        status="found" if chosen is not None else "not_found",
    )
