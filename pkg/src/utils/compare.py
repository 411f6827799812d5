"""Side-by-side summary of finished runs on the same task."""

import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from src.data.defaults import DONE_SENTINEL, PRIMARY_METRIC
from src.errors import IncompatibleRunsError
from src.supervised.analysis import exclusive_failures
from src.utils.exports import PREDICTIONS_FILE, read_predictions
from src.utils.metrics import METRICS_FILE, MetricsRow, read_metrics, write_rows


@dataclass
class RunCurves:
    run_dir: str
    rows: List[MetricsRow]

    @property
    def run_id(self) -> str:
        return self.rows[0].run_id if self.rows else os.path.basename(os.path.normpath(self.run_dir))

    @property
    def task(self) -> Optional[str]:
        return self.rows[0].task if self.rows else None

    def series(self, metric: str) -> List[tuple]:
        return sorted((r.step, r.value) for r in self.rows if r.metric == metric)

    def last_step(self, metric: str) -> Optional[int]:
        points = self.series(metric)
        return points[-1][0] if points else None


@dataclass
class CompareResult:
    lines: List[str] = field(default_factory=list)
    incomplete: List[str] = field(default_factory=list)
    truncated_to: Optional[int] = None


def is_complete(run_dir: str) -> bool:
    return os.path.exists(os.path.join(run_dir, DONE_SENTINEL))


def first_reaching(points: List[tuple], threshold: float) -> Optional[int]:
    for step, value in points:
        if value >= threshold:
            return step
    return None


def _format(value: float) -> str:
    return f"{value:.4f}"


def compare(run_dirs: List[str], thresholds: Optional[Dict[str, float]] = None,
            merged_csv: Optional[str] = None, logger=None) -> CompareResult:
    """Align completed runs by step and summarize their primary metric.

    Args:
        run_dirs: Run output directories
        thresholds: Metric name -> value for steps-to-threshold reporting
        merged_csv: Optional path for a merged tidy CSV of the aligned curves
        logger: Optional StructuredLogger

    Returns:
        CompareResult with printable summary lines

    Raises:
        IncompatibleRunsError: fewer than two complete runs, or mixed tasks
    """
    thresholds = thresholds or {}
    result = CompareResult()
    runs: List[RunCurves] = []
    for run_dir in run_dirs:
        if not is_complete(run_dir):
            result.incomplete.append(run_dir)
            result.lines.append(f"INCOMPLETE {run_dir}: no {DONE_SENTINEL} sentinel, skipped")
            continue
        runs.append(RunCurves(run_dir, read_metrics(os.path.join(run_dir, METRICS_FILE))))

    if len(runs) < 2:
        raise IncompatibleRunsError(f"compare needs at least 2 completed runs, got {len(runs)}")
    tasks = sorted({run.task for run in runs if run.task is not None})
    if len(tasks) != 1:
        raise IncompatibleRunsError(f"runs cover different tasks: {', '.join(tasks) or 'none'}")
    task = tasks[0]
    primary = PRIMARY_METRIC[task]

    last_steps = [run.last_step(primary) for run in runs]
    if any(step is None for step in last_steps):
        raise IncompatibleRunsError(f"every run needs {primary} rows")
    cutoff = min(last_steps)
    if len(set(last_steps)) > 1:
        result.truncated_to = cutoff
        result.lines.append(f"NOTE runs differ in length; aligned up to step {cutoff}")
    unit = "step" if task == "cartpole" else "epoch"

    for run in runs:
        points = [(s, v) for s, v in run.series(primary) if s <= cutoff]
        values = np.array([v for _, v in points])
        parts = [
            f"{run.run_id}",
            f"final {primary}={_format(values[-1])}",
            f"best {primary}={_format(values.max())}",
        ]
        for name, threshold in sorted(thresholds.items()):
            series = [(s, v) for s, v in run.series(name) if s <= cutoff]
            reached = first_reaching(series, threshold)
            parts.append(f"{name}>={threshold}: {'never' if reached is None else f'{unit} {reached}'}")
        result.lines.append("  ".join(parts))

    for i in range(len(runs)):
        for j in range(i + 1, len(runs)):
            a_path = os.path.join(runs[i].run_dir, PREDICTIONS_FILE)
            b_path = os.path.join(runs[j].run_dir, PREDICTIONS_FILE)
            if not (os.path.exists(a_path) and os.path.exists(b_path)):
                continue
            ids_a, labels, pred_a = read_predictions(a_path)
            ids_b, _, pred_b = read_predictions(b_path)
            if not np.array_equal(ids_a, ids_b):
                continue
            split = exclusive_failures(pred_a, pred_b, labels, ids_a)
            result.lines.append(
                f"FAILURES {runs[i].run_id} only={len(split['a_only'])}  "
                f"{runs[j].run_id} only={len(split['b_only'])}  both={len(split['both'])}"
            )

    if merged_csv:
        merged = [(run.run_dir, row) for run in runs for row in run.rows if row.step <= cutoff]
        write_rows(merged_csv, [row for _, row in merged],
                   extra_column="run_dir", extra_values=[d for d, _ in merged])
        result.lines.append(f"Merged CSV written to {merged_csv}")

    if logger:
        logger.info("Runs compared", runs=len(runs), incomplete=len(result.incomplete),
                    truncated_to=result.truncated_to)
    return result
