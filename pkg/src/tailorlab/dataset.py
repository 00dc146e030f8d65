"""Tabular dataset format: one row per participant, lossless round-trip.

Column order is fixed: participant_id, arm_* columns (canonical factor
order), week-indexed observed columns per variable, then
R, classification_week, A, rescue_week, rescue_option, Y, Y_bin, Y_adj,
path. Floats are written with repr so reading the file back reproduces
the exact values. The path column packs the stochastic randomization
steps as week:action:probability triples joined by ';' (actions never
contain ':' or ';', so no CSV quoting is ever needed).
"""

from __future__ import annotations

import csv
import io

from .errors import ConfigurationError
from .designs import FACTOR_ORDER
from .rules import ObservedTrajectory, PathStep, TrialRecord

_FIXED_TAIL = (
    "R",
    "classification_week",
    "A",
    "rescue_week",
    "rescue_option",
    "Y",
    "Y_bin",
    "Y_adj",
    "path",
)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _fmt_path(path: tuple[PathStep, ...]) -> str:
    return ";".join(f"{s.week}:{s.action}:{repr(s.probability)}" for s in path)


def _parse_path(text: str) -> tuple[PathStep, ...]:
    if not text:
        return ()
    steps = []
    for item in text.split(";"):
        week, action, prob = item.split(":")
        steps.append(PathStep(int(week), action, float(prob)))
    return tuple(steps)


def header_for(records: list[TrialRecord]) -> list[str]:
    if not records:
        raise ConfigurationError("cannot build a dataset from zero records")
    factors = [f for f in FACTOR_ORDER if f in records[0].arms]
    variables = list(records[0].trajectory.values.keys())
    horizon = records[0].trajectory.horizon
    cols = ["participant_id"]
    cols += [f"arm_{f}" for f in factors]
    for var in variables:
        cols += [f"obs_{var}_w{t}" for t in range(1, horizon + 1)]
    cols += list(_FIXED_TAIL)
    return cols


def write_records(records: list[TrialRecord]) -> str:
    """Render records as CSV text (UTF-8, '\\n' line endings)."""
    header = header_for(records)
    factors = [c[len("arm_") :] for c in header if c.startswith("arm_")]
    variables = list(records[0].trajectory.values.keys())
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for r in records:
        row = [str(r.participant_id)]
        for f in factors:
            if f not in r.arms:
                row.append("")
                continue
            row.append(r.arms[f])
        for var in variables:
            row.extend(repr(float(v)) for v in r.trajectory.series(var))
        row += [
            _fmt(r.response),
            _fmt(r.classification_week),
            str(r.rescued),
            _fmt(r.rescue_week),
            _fmt(r.rescue_option),
            repr(float(r.y)),
            str(r.y_bin),
            repr(float(r.y_adj)),
            _fmt_path(r.path),
        ]
        writer.writerow(row)
    return buf.getvalue()


def read_records(text: str) -> list[TrialRecord]:
    """Parse CSV text produced by write_records (or hand-built to the same
    schema) back into records."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ConfigurationError("dataset is empty") from None
    if header[:1] != ["participant_id"] or header[-len(_FIXED_TAIL) :] != list(_FIXED_TAIL):
        raise ConfigurationError(
            "dataset header does not match the expected schema"
        )
    factors = []
    var_cols: dict[str, list[int]] = {}
    for idx, col in enumerate(header):
        if col.startswith("arm_"):
            factors.append((col[len("arm_") :], idx))
        elif col.startswith("obs_"):
            name, _, week = col[len("obs_") :].rpartition("_w")
            if not name or not week.isdigit():
                raise ConfigurationError(f"malformed observed column {col!r}")
            var_cols.setdefault(name, []).append(idx)
    tail_at = {col: len(header) - len(_FIXED_TAIL) + i for i, col in enumerate(_FIXED_TAIL)}

    records: list[TrialRecord] = []
    for row in reader:
        if not row:
            continue
        if len(row) != len(header):
            raise ConfigurationError(
                f"row has {len(row)} fields, header has {len(header)}"
            )
        arms = {f: row[idx] for f, idx in factors if row[idx] != ""}
        trajectory = ObservedTrajectory(
            {
                var: tuple(float(row[i]) for i in cols)
                for var, cols in var_cols.items()
            }
        )
        resp = row[tail_at["R"]]
        cls_week = row[tail_at["classification_week"]]
        rweek = row[tail_at["rescue_week"]]
        ropt = row[tail_at["rescue_option"]]
        records.append(
            TrialRecord(
                participant_id=int(row[0]),
                arms=arms,
                trajectory=trajectory,
                response=int(resp) if resp != "" else None,
                classification_week=int(cls_week) if cls_week != "" else None,
                rescued=int(row[tail_at["A"]]),
                rescue_week=int(rweek) if rweek != "" else None,
                rescue_option=ropt if ropt != "" else None,
                y=float(row[tail_at["Y"]]),
                y_bin=int(row[tail_at["Y_bin"]]),
                y_adj=float(row[tail_at["Y_adj"]]),
                path=_parse_path(row[tail_at["path"]]),
            )
        )
    if not records:
        raise ConfigurationError("dataset contains a header but no rows")
    return records
