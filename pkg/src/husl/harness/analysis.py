"""Run analysis (DTW, GCSM statistics, GRF orientation) and cross-run comparison."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from husl.harness.runlog import RunLog
from husl.metrics import (
    InsufficientCyclesError,
    OrientationUndefinedError,
    average_cycles,
    comcos_series,
    default_segmentation,
    dtw_distance,
    orientation_error,
    pca_ellipse,
    resample_cycle,
)
from husl.model import ModelParams

NA = "n/a"
METRICS = ("dtw_to_baseline", "gcsm_median", "orientation_error")


@dataclass(frozen=True)
class AnalysisReport:
    """Per-run metrics; ``None`` marks a value that could not be computed."""

    dtw_to_baseline: float | None
    gcsm: dict | None
    orientation_error: float | None
    cycle_count: int
    mean_recovery_curve: dict | None
    status: str = "ok"

    @property
    def gcsm_median(self) -> float | None:
        return None if self.gcsm is None else self.gcsm["median"]

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True, allow_nan=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "AnalysisReport":
        doc = json.loads(text)
        return cls(**doc)


def stride_period_from_phase(phase: np.ndarray, dt: float, fallback: float | None = None) -> float:
    """Gait period from the logged support phases (two double-support starts per stride)."""
    is_double = np.asarray(phase) == 0
    starts = np.flatnonzero(is_double[1:] & ~is_double[:-1]) + 1
    if len(starts) >= 2:
        return 2.0 * float(np.median(np.diff(starts))) * dt
    return fallback if fallback is not None else ModelParams().gait_period


def gcsm_stats(values) -> dict:
    """Median, mean, quartiles and Tukey (1.5 IQR) whisker ends."""
    v = np.asarray(values, dtype=float)
    q1, med, q3 = np.percentile(v, [25.0, 50.0, 75.0])
    iqr = q3 - q1
    low = v[v >= q1 - 1.5 * iqr].min()
    high = v[v <= q3 + 1.5 * iqr].max()
    return {
        "median": float(med), "mean": float(v.mean()), "q1": float(q1), "q3": float(q3),
        "whisker_low": float(low), "whisker_high": float(high), "values": [float(x) for x in v],
    }


def analyze_run(run: RunLog, baseline: RunLog | None, stride_period: float | None = None) -> AnalysisReport:
    """Compute the report of ``run``; DTW is taken against ``baseline``'s CoM path."""
    if baseline is not None and baseline.dt != run.dt:
        raise ValueError(f"run dt {run.dt} differs from baseline dt {baseline.dt}")
    traj = run.trajectory
    if traj is None:
        return AnalysisReport(None, None, None, 0, None, run.status)

    dtw = None
    if baseline is not None and baseline.trajectory is not None:
        dtw = dtw_distance(traj.com, baseline.trajectory.com)

    period = stride_period if stride_period is not None else stride_period_from_phase(traj.phase, traj.dt)
    d = comcos_series(traj)
    stats = curve = None
    count = 0
    try:
        cycles = default_segmentation(d, period, traj.dt)
        count = len(cycles)
        stats = gcsm_stats(cycles.gcsm)
        mean, std = average_cycles([resample_cycle(c) for c in cycles.cycles])
        curve = {"mean": mean.tolist(), "std": std.tolist()}
    except InsufficientCyclesError:
        pass

    orient = None
    try:
        orient = orientation_error(pca_ellipse(np.column_stack([traj.grf_left[:, 0], traj.grf_right[:, 0]])))
    except OrientationUndefinedError:
        pass
    return AnalysisReport(dtw, stats, orient, count, curve, run.status)


def load_report(path) -> AnalysisReport:
    return AnalysisReport.from_json(Path(path).read_text())


@dataclass(frozen=True)
class ComparisonTable:
    names: list
    values: dict  # name -> {metric: value or None}
    changes: list  # (reference, other, {metric: percent change or None})

    def render(self) -> str:
        def cell(x):
            return NA if x is None else f"{x:.6g}"

        def pct(x):
            return NA if x is None else f"{x:+.2f}%"

        lines = ["| run | " + " | ".join(METRICS) + " |", "|---" * (len(METRICS) + 1) + "|"]
        for name in self.names:
            lines.append(f"| {name} | " + " | ".join(cell(self.values[name][m]) for m in METRICS) + " |")
        lines += ["", "| other vs reference | " + " | ".join(METRICS) + " |", "|---" * (len(METRICS) + 1) + "|"]
        for ref, other, change in self.changes:
            lines.append(f"| {other} vs {ref} | " + " | ".join(pct(change[m]) for m in METRICS) + " |")
        return "\n".join(lines) + "\n"


def percent_change(reference: float | None, other: float | None) -> float | None:
    """``100 * (other - reference) / |reference|``; equal values give 0, a zero reference n/a."""
    if reference is None or other is None:
        return None
    if other == reference:
        return 0.0
    if reference == 0 or not math.isfinite(reference):
        return None
    return 100.0 * (other - reference) / abs(reference)


def compare_runs(reports) -> ComparisonTable:
    """Metric table for ``[(name, report), ...]`` plus changes for each pair (later vs earlier)."""
    reports = list(reports)
    if len(reports) < 2:
        raise ValueError("need at least two reports to compare")
    names = [n for n, _ in reports]
    if len(set(names)) != len(names):
        raise ValueError("report names must be unique")
    values = {n: {"dtw_to_baseline": r.dtw_to_baseline, "gcsm_median": r.gcsm_median,
                  "orientation_error": r.orientation_error} for n, r in reports}
    changes = []
    for i in range(len(names)):
        for j in range(i + 1, len(names)):
            a, b = values[names[i]], values[names[j]]
            changes.append((names[i], names[j], {m: percent_change(a[m], b[m]) for m in METRICS}))
    return ComparisonTable(names, values, changes)
