"""Estimators and diagnostics for tailoring-variable trials.

Two families of questions are answered, and outputs keep them apart.
Causal estimators (arm contrasts, weighted regime values, moderation
scans) use the randomization actually performed. Correlational
estimators (conditional means below a cutoff, elbow scans of predictive
accuracy, cutoff misclassification scans) describe prognosis under the
initial treatment alone and carry an explicit caveat, because they say
nothing about what adopting a different rule would cause.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, replace
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np
from scipy import stats

from . import seeds
from .errors import (
    AnalysisError,
    ConfigurationError,
    DegenerateDataError,
    PositivityError,
)
from .rules import (
    AdaptiveIntervention,
    Aggregation,
    Direction,
    TrialRecord,
    aggregate_matrix,
    nonresponder_mask,
    record_matrices,
)

CORRELATIONAL_CAVEAT = (
    "correlational: summarizes prognosis under the initial treatment alone "
    "(rescued participants excluded); it does not estimate how outcomes "
    "would change if a different cutoff, decision time, or variable were "
    "actually adopted"
)

EQUAL_COST_WARNING = (
    "equal misclassification weights assume wrongly offering rescue is "
    "exactly as bad as wrongly withholding it; set fp_weight/fn_weight "
    "deliberately if that is not true"
)


# ---------------------------------------------------------------------------
# small shared helpers


def _natural_key(label: str):
    return tuple(
        (0, int(part)) if part.isdigit() else (1, part)
        for part in re.split(r"(\d+)", label)
        if part != ""
    )


def _ols(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Least squares fit; returns (beta, covariance, fitted)."""
    beta, *_ = np.linalg.lstsq(x, y, rcond=None)
    fitted = x @ beta
    dof = x.shape[0] - x.shape[1]
    if dof > 0:
        sigma2 = float(np.sum((y - fitted) ** 2)) / dof
        cov = sigma2 * np.linalg.pinv(x.T @ x)
    else:
        cov = np.full((x.shape[1], x.shape[1]), np.nan)
    return beta, cov, fitted


def _require_initial_only(records: Sequence[TrialRecord], op: str) -> None:
    if any(r.rescued for r in records):
        raise AnalysisError(
            f"{op} expects initial-treatment-only records; "
            "filter out rescued participants first"
        )


def _aggregated(
    records: Sequence[TrialRecord], variable: str, aggregation: Aggregation, week: int
) -> np.ndarray:
    mats = record_matrices(list(records), (variable,))
    if variable not in mats:
        raise ConfigurationError(f"unknown observed variable {variable!r}")
    return aggregate_matrix(mats[variable], aggregation, week)


def _resolve_week(records: Sequence[TrialRecord], week: int | None, op: str) -> int:
    if week is not None:
        return week
    weeks = set()
    for r in records:
        if r.classification_week is not None:
            weeks.add(r.classification_week)
        elif r.path:
            weeks.add(r.path[0].week)
    if len(weeks) != 1:
        raise AnalysisError(
            f"{op}: cannot infer a single assessment week from the records; "
            "pass week= explicitly"
        )
    return weeks.pop()


# ---------------------------------------------------------------------------
# arm contrasts


@dataclass(frozen=True)
class ArmSummary:
    label: str
    n: int
    mean: float
    se: float | None


@dataclass(frozen=True)
class PairContrast:
    arm_a: str
    arm_b: str
    difference: float
    se: float
    p_value: float
    p_adjusted: float | None = None


@dataclass(frozen=True)
class ContrastTable:
    factors: tuple[str, ...]
    arms: tuple[ArmSummary, ...]
    pairs: tuple[PairContrast, ...]
    excluded: tuple[str, ...]


def _welch(y1: np.ndarray, y2: np.ndarray) -> tuple[float, float, float]:
    """Difference in means with Welch SE and two-sided p."""
    n1, n2 = len(y1), len(y2)
    diff = float(y1.mean() - y2.mean())
    v1 = float(y1.var(ddof=1)) / n1
    v2 = float(y2.var(ddof=1)) / n2
    se = math.sqrt(v1 + v2)
    if se == 0.0:
        return diff, 0.0, 1.0 if diff == 0.0 else 0.0
    df = (v1 + v2) ** 2 / (v1**2 / (n1 - 1) + v2**2 / (n2 - 1))
    t = diff / se
    p = 2.0 * float(stats.t.sf(abs(t), df))
    return diff, se, p


def arm_contrasts(
    records: Sequence[TrialRecord],
    factors: Sequence[str],
    outcome: str = "y",
    multiplicity: str = "none",
) -> ContrastTable:
    """Marginal arm means and pairwise differences.

    Means pool responders and nonresponders within each arm; grouping is
    restricted to randomized factors, so nonresponder subgroups are never
    contrasted across arms (those subsets are defined differently per arm
    and have no common interpretation).

    outcome selects the record field: 'y', 'y_bin', or 'y_adj'.
    multiplicity 'bonferroni' adds adjusted p-values for
    conclusion-priority reporting; the default reports raw p-values.
    """
    if not records:
        raise DegenerateDataError("no records")
    if outcome not in ("y", "y_bin", "y_adj"):
        raise ConfigurationError(f"unknown outcome field {outcome!r}")
    if multiplicity not in ("none", "bonferroni"):
        raise ConfigurationError(f"unknown multiplicity rule {multiplicity!r}")
    factors = tuple(factors)
    groups: dict[str, list[float]] = {}
    for r in records:
        for f in factors:
            if f not in r.arms:
                raise ConfigurationError(
                    f"record {r.participant_id} has no randomized factor {f!r}"
                )
        key = (
            r.arms[factors[0]]
            if len(factors) == 1
            else "+".join(f"{f}={r.arms[f]}" for f in factors)
        )
        groups.setdefault(key, []).append(float(getattr(r, outcome)))

    labels = sorted(groups, key=_natural_key)
    arms: list[ArmSummary] = []
    excluded: list[str] = []
    usable: dict[str, np.ndarray] = {}
    for label in labels:
        y = np.asarray(groups[label])
        n = len(y)
        if n < 2:
            arms.append(ArmSummary(label, n, float(y.mean()), None))
            excluded.append(label)
            continue
        arms.append(
            ArmSummary(label, n, float(y.mean()), float(y.std(ddof=1) / math.sqrt(n)))
        )
        usable[label] = y

    raw: list[tuple[str, str, float, float, float]] = []
    for a, b in combinations([l for l in labels if l in usable], 2):
        diff, se, p = _welch(usable[a], usable[b])
        raw.append((a, b, diff, se, p))
    m = len(raw)
    pairs = tuple(
        PairContrast(
            a,
            b,
            diff,
            se,
            p,
            p_adjusted=min(1.0, p * m) if multiplicity == "bonferroni" else None,
        )
        for a, b, diff, se, p in raw
    )
    return ContrastTable(factors, tuple(arms), pairs, tuple(excluded))


# ---------------------------------------------------------------------------
# correlational estimators


@dataclass(frozen=True)
class ConditionalMean:
    variable: str
    cutoff: float
    week: int
    n: int
    mean: float | None
    flag: str | None
    caveat: str = CORRELATIONAL_CAVEAT


def conditional_mean_below_cutoff(
    records: Sequence[TrialRecord],
    variable: str,
    cutoff: float,
    week: int,
    aggregation: Aggregation = "mean_rate",
) -> ConditionalMean:
    """Mean outcome among participants whose aggregated variable sits below
    the cutoff at the given week, under initial treatment only."""
    _require_initial_only(records, "conditional_mean_below_cutoff")
    agg = _aggregated(records, variable, aggregation, week)
    y = np.array([r.y for r in records])
    mask = agg < cutoff
    n = int(mask.sum())
    if n == 0:
        return ConditionalMean(variable, cutoff, week, 0, None, "empty conditioning set")
    return ConditionalMean(variable, cutoff, week, n, float(y[mask].mean()), None)


# ---------------------------------------------------------------------------
# weighted regime value


@dataclass(frozen=True)
class RegimeValue:
    estimate: float
    se: float | None
    n_consistent: int
    mean_weight: float
    normalized: bool


def _regime_weights(
    records: Sequence[TrialRecord],
    adi: AdaptiveIntervention,
    cell_label: str | None,
) -> np.ndarray:
    """Per-record inverse-probability weight for following the regime.

    A record contributes the product of 1/p over its stochastic decision
    points while every realized action matches what the regime prescribes
    for that participant's trajectory, and drops to zero at the first
    mismatch.
    """
    rule = adi.rule
    week_k = rule.decision_week
    mats = record_matrices(list(records), rule.variables)
    nonresp = nonresponder_mask(mats, rule)

    weights = np.zeros(len(records))
    for i, r in enumerate(records):
        w = 1.0
        consistent = True
        for step in r.path:
            if step.week == 0:
                # Upfront composite assignment (rule-randomizing designs):
                # the regime's cell must be named explicitly.
                if cell_label is None:
                    raise AnalysisError(
                        "records carry an upfront composite randomization; pass "
                        "the regime's arm label (cell_label) to evaluate it, or "
                        "use arm_contrasts"
                    )
                if step.action != cell_label:
                    consistent = False
                    break
                w /= step.probability
                continue
            if step.action.startswith("rescue="):
                prescribed = f"rescue={adi.rescue_option}" if (
                    nonresp[i] and step.week == week_k
                ) else None
            elif step.action in ("rescue", "wait"):
                want_rescue = nonresp[i] and step.week == week_k
                prescribed = "rescue" if want_rescue else "wait"
            elif step.action in ("decide",):
                prescribed = "decide" if step.week == week_k else "wait"
            else:
                prescribed = None
            if prescribed != step.action:
                consistent = False
                break
            w /= step.probability
        if not consistent:
            continue
        # Realized rescue behavior must equal the regime's prescription;
        # this closes the deterministic part of the pathway.
        if bool(r.rescued) != bool(nonresp[i]):
            consistent = False
        elif r.rescued and (
            r.rescue_week != week_k or r.rescue_option != adi.rescue_option
        ):
            consistent = False
        if consistent:
            weights[i] = w
    return weights


def ipw_regime_value(
    records: Sequence[TrialRecord],
    adi: AdaptiveIntervention,
    normalized: bool = True,
    n_bootstrap: int = 1000,
    seed: int = 0,
    cell_label: str | None = None,
) -> RegimeValue:
    """Value of an embedded regime by inverse-probability weighting.

    Normalized (weighted-mean) estimation is the default for variance
    stability; normalized=False gives the plain weighted average whose
    expectation equals the plug-in truth exactly, which is what oracle
    comparisons want.
    """
    if not records:
        raise DegenerateDataError("no records")
    w = _regime_weights(records, adi, cell_label)
    y = np.array([r.y for r in records])
    total = float(w.sum())
    if total == 0.0:
        raise AnalysisError(
            f"no participant followed regime (rescue_option={adi.rescue_option!r}, "
            f"week={adi.rule.decision_week}); it is not identifiable from this data"
        )
    if normalized:
        estimate = float((w * y).sum() / total)
    else:
        estimate = float((w * y).mean())

    se = None
    if n_bootstrap > 0:
        rng = seeds.substream(seed, seeds.ANALYSIS, 0)
        n = len(records)
        draws = np.empty(n_bootstrap)
        for b in range(n_bootstrap):
            idx = rng.integers(0, n, size=n)
            wb, yb = w[idx], y[idx]
            tb = wb.sum()
            if normalized:
                draws[b] = (wb * yb).sum() / tb if tb > 0 else np.nan
            else:
                draws[b] = (wb * yb).mean()
        draws = draws[~np.isnan(draws)]
        if len(draws) > 1:
            se = float(draws.std(ddof=1))
    return RegimeValue(
        estimate=estimate,
        se=se,
        n_consistent=int((w > 0).sum()),
        mean_weight=float(w.mean()),
        normalized=normalized,
    )


# ---------------------------------------------------------------------------
# quadratic response model over decision times


@dataclass(frozen=True)
class QuadraticFit:
    coefficients: tuple[float, float, float] | None
    optimum: float | None
    concave: bool
    clamped: bool
    interval: tuple[float, float] | None
    arm_means: tuple[tuple[float, float], ...]  # (time, observed mean)
    fitted_means: tuple[tuple[float, float], ...] | None
    flag: str | None


def _quad_argmax(
    beta: np.ndarray, times: np.ndarray, arm_means: dict[float, float]
) -> tuple[float, bool, bool]:
    """(optimum, concave, clamped) under the estimator's clamping rule."""
    b0, b1, b2 = (float(v) for v in beta)
    concave = b2 < 0
    if concave:
        t_star = -b1 / (2.0 * b2)
        if times.min() <= t_star <= times.max():
            return t_star, True, False
    best = max(arm_means, key=lambda t: (arm_means[t], -t))
    return float(best), concave, True


def fit_quadratic_time(
    records: Sequence[TrialRecord],
    n_bootstrap: int = 1000,
    seed: int = 0,
) -> QuadraticFit:
    """Least-squares quadratic of outcome on decision time, pooling arms.

    With exactly three arms the model is saturated and the fitted arm
    means reproduce the observed ones. The optimum is the vertex when the
    fit is concave and lands inside the candidate range; otherwise it is
    clamped to the best observed arm and flagged. Fewer than three
    distinct times: no quadratic, arm means only.
    """
    if not records:
        raise DegenerateDataError("no records")
    try:
        t = np.array([float(r.arms["time"]) for r in records])
    except KeyError:
        raise ConfigurationError(
            "records carry no 'time' factor; fit_quadratic_time needs a "
            "decision-time-randomizing design"
        ) from None
    y = np.array([r.y for r in records])
    arm_means = {
        float(tt): float(y[t == tt].mean()) for tt in sorted(set(t.tolist()))
    }
    arm_tuple = tuple(sorted(arm_means.items()))
    distinct = np.array(sorted(arm_means))
    if len(distinct) < 3:
        return QuadraticFit(
            coefficients=None,
            optimum=None,
            concave=False,
            clamped=False,
            interval=None,
            arm_means=arm_tuple,
            fitted_means=None,
            flag="fewer than three distinct times; reporting arm means only",
        )

    def design(tv: np.ndarray) -> np.ndarray:
        return np.column_stack([np.ones_like(tv), tv, tv**2])

    beta, _, _ = _ols(design(t), y)
    optimum, concave, clamped = _quad_argmax(beta, distinct, arm_means)
    fitted = design(distinct) @ beta
    flag = None
    if not concave:
        flag = "non-concave fit; optimum clamped to best observed arm"
    elif clamped:
        flag = "vertex outside candidate range; optimum clamped to best observed arm"

    interval = None
    if n_bootstrap > 0:
        rng = seeds.substream(seed, seeds.ANALYSIS, 1)
        n = len(records)
        stars = np.empty(n_bootstrap)
        for b in range(n_bootstrap):
            idx = rng.integers(0, n, size=n)
            tb, yb = t[idx], y[idx]
            arms_b = {
                float(tt): float(yb[tb == tt].mean())
                for tt in sorted(set(tb.tolist()))
            }
            if len(arms_b) < 3:
                stars[b] = np.nan
                continue
            beta_b, _, _ = _ols(design(tb), yb)
            stars[b], _, _ = _quad_argmax(beta_b, np.array(sorted(arms_b)), arms_b)
        stars = stars[~np.isnan(stars)]
        if len(stars) > 0:
            interval = (
                float(np.percentile(stars, 2.5)),
                float(np.percentile(stars, 97.5)),
            )

    return QuadraticFit(
        coefficients=(float(beta[0]), float(beta[1]), float(beta[2])),
        optimum=float(optimum),
        concave=concave,
        clamped=clamped,
        interval=interval,
        arm_means=arm_tuple,
        fitted_means=tuple((float(tt), float(fv)) for tt, fv in zip(distinct, fitted)),
        flag=flag,
    )


# ---------------------------------------------------------------------------
# ROC / elbow


def roc_auc(scores: Iterable[float], labels: Iterable[int]) -> float:
    """Area under the ROC curve by exact pairwise concordance.

    Equals P(score_pos > score_neg) + 0.5 * P(tie), computed through
    midranks, which reproduces the pairwise enumeration exactly.
    """
    s = np.asarray(list(scores), dtype=float)
    lab = np.asarray(list(labels), dtype=int)
    if s.shape != lab.shape or s.ndim != 1:
        raise ConfigurationError("scores and labels must be equal-length vectors")
    n_pos = int((lab == 1).sum())
    n_neg = int((lab == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise DegenerateDataError("roc_auc needs both classes present")
    ranks = stats.rankdata(s)
    return float((ranks[lab == 1].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


@dataclass(frozen=True)
class ElbowCurve:
    variable: str
    points: tuple[tuple[int, float], ...]  # (week, AUC)
    elbow: int
    delta: float
    caveat: str = CORRELATIONAL_CAVEAT


def choose_elbow(times: Sequence[int], aucs: Sequence[float], delta: float) -> int:
    """Earliest time whose AUC is within delta of the maximum."""
    if len(times) != len(aucs) or not times:
        raise ConfigurationError("times and aucs must be nonempty and equal length")
    threshold = max(aucs) - delta
    for t, a in zip(times, aucs):
        if a >= threshold:
            return t
    return times[-1]  # unreachable: the max itself qualifies


def elbow_scan(
    records: Sequence[TrialRecord],
    variable: str,
    times: Sequence[int],
    delta: float = 0.02,
    aggregation: Aggregation = "mean_rate",
    direction: Direction = "below",
    success_threshold: float | None = None,
) -> ElbowCurve:
    """Predictive accuracy of the aggregated variable for long-term failure
    at each candidate decision time, and the earliest good-enough time.

    The scored risk is oriented by `direction` (below: lower values mean
    higher failure risk). This is a prognosis summary, not a comparison
    of decision times as interventions; the caveat travels with the
    output.
    """
    _require_initial_only(records, "elbow_scan")
    if not times:
        raise ConfigurationError("candidate times must be nonempty")
    if sorted(times) != list(times):
        raise ConfigurationError("candidate times must be increasing")
    if success_threshold is None:
        failure = np.array([1 - r.y_bin for r in records])
    else:
        failure = np.array([1 if r.y < success_threshold else 0 for r in records])
    points = []
    for t in times:
        agg = _aggregated(records, variable, aggregation, t)
        risk = -agg if direction == "below" else agg
        points.append((int(t), roc_auc(risk, failure)))
    elbow = choose_elbow([p[0] for p in points], [p[1] for p in points], delta)
    return ElbowCurve(variable, tuple(points), elbow, delta)


# ---------------------------------------------------------------------------
# cutoff misclassification scan


@dataclass(frozen=True)
class CutoffCostRow:
    cutoff: float
    n_flagged: int
    false_positives: int
    false_negatives: int
    cost: float
    sensitivity: float | None
    specificity: float | None


@dataclass(frozen=True)
class CutoffScan:
    variable: str
    week: int
    rows: tuple[CutoffCostRow, ...]
    best_cutoff: float
    fp_weight: float
    fn_weight: float
    warning: str | None
    caveat: str = CORRELATIONAL_CAVEAT


def cutoff_scan_cost(
    records: Sequence[TrialRecord],
    variable: str,
    week: int,
    grid: Sequence[float],
    fp_weight: float = 1.0,
    fn_weight: float = 1.0,
    aggregation: Aggregation = "mean_rate",
    direction: Direction = "below",
) -> CutoffScan:
    """Weighted misclassification cost of each candidate cutoff for
    predicting long-term failure, under initial treatment only.

    A false positive is a long-term success flagged as nonresponder; a
    false negative is a failure left unflagged. Ties go to the cutoff
    flagging fewer participants (the stricter definition). Equal weights
    emit a warning rather than silently assuming symmetry.
    """
    _require_initial_only(records, "cutoff_scan_cost")
    if not grid:
        raise ConfigurationError("cutoff grid must be nonempty")
    if fp_weight < 0 or fn_weight < 0:
        raise ConfigurationError("misclassification weights must be >= 0")
    agg = _aggregated(records, variable, aggregation, week)
    success = np.array([r.y_bin for r in records], dtype=bool)
    failure = ~success
    rows: list[CutoffCostRow] = []
    for c in grid:
        flagged = agg < c if direction == "below" else agg > c
        fp = int((success & flagged).sum())
        fn = int((failure & ~flagged).sum())
        tp = int((failure & flagged).sum())
        tn = int((success & ~flagged).sum())
        rows.append(
            CutoffCostRow(
                cutoff=float(c),
                n_flagged=int(flagged.sum()),
                false_positives=fp,
                false_negatives=fn,
                cost=fp_weight * fp + fn_weight * fn,
                sensitivity=tp / (tp + fn) if (tp + fn) > 0 else None,
                specificity=tn / (tn + fp) if (tn + fp) > 0 else None,
            )
        )
    strictness = 1.0 if direction == "below" else -1.0
    best = min(rows, key=lambda r: (r.cost, r.n_flagged, strictness * r.cutoff))
    return CutoffScan(
        variable=variable,
        week=week,
        rows=tuple(rows),
        best_cutoff=best.cutoff,
        fp_weight=fp_weight,
        fn_weight=fn_weight,
        warning=EQUAL_COST_WARNING if fp_weight == fn_weight else None,
    )


# ---------------------------------------------------------------------------
# moderation scan (singly randomized rescue data)


@dataclass(frozen=True)
class ModerationRow:
    variable: str
    interaction: float
    se: float
    p_value: float
    z: float
    rescue_effect_low: float
    rescue_effect_high: float
    qualitative: bool


@dataclass(frozen=True)
class ModerationReport:
    week: int
    propensity: float
    rows: tuple[ModerationRow, ...]  # ranked by |interaction| / se


def _constant_rescue_propensity(records: Sequence[TrialRecord]) -> tuple[int, float]:
    """Week and rescue probability, requiring one constant randomization."""
    weeks: set[int] = set()
    probs: set[float] = set()
    for r in records:
        steps = [s for s in r.path if s.action in ("rescue", "wait")]
        if len(steps) != 1:
            raise PositivityError(
                "moderation_scan needs one directly randomized rescue decision "
                "per participant; run positivity_check on this dataset instead"
            )
        step = steps[0]
        weeks.add(step.week)
        probs.add(step.probability if step.action == "rescue" else 1.0 - step.probability)
    if len(weeks) != 1 or len(probs) != 1:
        raise PositivityError(
            "rescue propensity varies across participants; the rescue action "
            "was not randomized independently of the trajectories — run "
            "positivity_check"
        )
    return weeks.pop(), probs.pop()


def moderation_scan(
    records: Sequence[TrialRecord],
    candidates: Sequence[str],
    aggregation: Aggregation = "mean_rate",
) -> ModerationReport:
    """Which observed variables moderate the rescue effect.

    Fits outcome ~ action + variable + action:variable per candidate and
    ranks by |interaction| / SE. The qualitative flag marks variables for
    which the fitted rescue effect changes sign across the observed range
    — the pattern that makes a variable genuinely useful for tailoring.
    """
    if not records:
        raise DegenerateDataError("no records")
    if not candidates:
        raise ConfigurationError("candidate variable list must be nonempty")
    week, propensity = _constant_rescue_propensity(records)
    a = np.array([r.rescued for r in records], dtype=float)
    y = np.array([r.y for r in records])
    rows: list[ModerationRow] = []
    for var in candidates:
        o = _aggregated(records, var, aggregation, week)
        x = np.column_stack([np.ones_like(o), a, o, a * o])
        beta, cov, _ = _ols(x, y)
        se = float(np.sqrt(cov[3, 3]))
        z = abs(float(beta[3])) / se if se > 0 else math.inf
        dof = len(records) - 4
        p = 2.0 * float(stats.t.sf(z, dof)) if se > 0 else 0.0
        lo, hi = float(o.min()), float(o.max())
        eff_lo = float(beta[1] + beta[3] * lo)
        eff_hi = float(beta[1] + beta[3] * hi)
        rows.append(
            ModerationRow(
                variable=var,
                interaction=float(beta[3]),
                se=se,
                p_value=p,
                z=z,
                rescue_effect_low=eff_lo,
                rescue_effect_high=eff_hi,
                qualitative=(eff_lo < 0 < eff_hi) or (eff_hi < 0 < eff_lo),
            )
        )
    rows.sort(key=lambda r: -r.z)
    return ModerationReport(week=week, propensity=propensity, rows=tuple(rows))


# ---------------------------------------------------------------------------
# positivity diagnostics


@dataclass(frozen=True)
class PositivityRow:
    cutoff: float
    stratum: str
    n: int
    n_rescued: int
    propensity: float | None
    ok: bool


@dataclass(frozen=True)
class PositivityReport:
    variable: str
    week: int
    rows: tuple[PositivityRow, ...]
    passed: bool
    failures: tuple[str, ...]


def positivity_check(
    records: Sequence[TrialRecord],
    variable: str,
    grid: Sequence[float],
    week: int | None = None,
    aggregation: Aggregation = "mean_rate",
    min_count: int = 0,
) -> PositivityReport:
    """Empirical rescue propensity within each side of each candidate
    cutoff; fails when any stratum is empty or its propensity hits 0 or 1
    (up to `min_count` stray observations)."""
    if not records:
        raise DegenerateDataError("no records")
    if not grid:
        raise ConfigurationError("cutoff grid must be nonempty")
    week = _resolve_week(records, week, "positivity_check")
    agg = _aggregated(records, variable, aggregation, week)
    a = np.array([r.rescued for r in records], dtype=int)
    rows: list[PositivityRow] = []
    failures: list[str] = []
    for c in grid:
        for name, mask in (("below", agg < c), ("at_or_above", agg >= c)):
            label = f"{variable} {name} {c:g}"
            n = int(mask.sum())
            if n == 0:
                rows.append(PositivityRow(float(c), name, 0, 0, None, False))
                failures.append(f"{label}: empty stratum, unidentifiable")
                continue
            k = int(a[mask].sum())
            prop = k / n
            ok = min(k, n - k) > min_count
            rows.append(PositivityRow(float(c), name, n, k, prop, ok))
            if not ok:
                failures.append(f"{label}: propensity {prop:g} with n={n}")
    return PositivityReport(
        variable=variable,
        week=week,
        rows=tuple(rows),
        passed=not failures,
        failures=tuple(failures),
    )


# ---------------------------------------------------------------------------
# cost adjustment


def cost_adjust(records: Sequence[TrialRecord], penalty: float) -> list[TrialRecord]:
    """Re-express outcomes net of a per-rescue cost: y_adj = y - penalty * A."""
    if penalty < 0:
        raise ConfigurationError("cost penalty must be >= 0")
    return [replace(r, y_adj=float(r.y - penalty * r.rescued)) for r in records]
