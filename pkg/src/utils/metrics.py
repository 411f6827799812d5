"""Tidy metrics CSV: one numeric value per row."""

import csv
import math
from dataclasses import dataclass, fields
from typing import Iterable, List, Optional

METRICS_FILE = "metrics.csv"
HEADER = ["run_id", "task", "mode", "seed", "step", "metric", "value"]
KEY_FIELDS = ("step", "epoch", "mode", "seed")


@dataclass
class MetricsRow:
    run_id: str
    task: str
    mode: str
    seed: int
    step: int
    metric: str
    value: float


def format_value(value: float) -> str:
    return repr(float(value))


class MetricsWriter:
    """Appends rows to ``metrics.csv``, flushing after each record.

    Floats are written with ``repr`` so reruns produce byte-identical files.
    """

    def __init__(self, path: str, run_id: str, task: str, mode: str, seed: int):
        self.path = path
        self.run_id = run_id
        self.task = task
        self.mode = mode
        self.seed = seed
        self.rows_written = 0
        self._file = open(path, "w", encoding="utf-8", newline="")
        self._writer = csv.writer(self._file, lineterminator="\n")
        self._writer.writerow(HEADER)

    def write(self, step: int, metric: str, value: Optional[float]) -> bool:
        """Write one row; ``None`` and non-finite values are skipped."""
        if value is None or not math.isfinite(float(value)):
            return False
        self._writer.writerow([self.run_id, self.task, self.mode, self.seed,
                               int(step), metric, format_value(value)])
        self.rows_written += 1
        return True

    def write_record(self, step: int, record) -> int:
        """Write every numeric field of a metrics dataclass except its keys."""
        written = 0
        for f in fields(record):
            if f.name in KEY_FIELDS:
                continue
            value = getattr(record, f.name)
            if isinstance(value, (int, float)) and not isinstance(value, bool):
                written += self.write(step, f.name, value)
        self._file.flush()
        return written

    def close(self):
        if not self._file.closed:
            self._file.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_metrics(path: str) -> List[MetricsRow]:
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames != HEADER:
            raise ValueError(f"{path}: unexpected metrics header {reader.fieldnames}")
        return [
            MetricsRow(
                run_id=row["run_id"],
                task=row["task"],
                mode=row["mode"],
                seed=int(row["seed"]),
                step=int(row["step"]),
                metric=row["metric"],
                value=float(row["value"]),
            )
            for row in reader
        ]


def write_rows(path: str, rows: Iterable[MetricsRow], extra_column: Optional[str] = None,
               extra_values: Optional[List[str]] = None):
    """Write already-built rows, optionally prefixed with one extra column."""
    rows = list(rows)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(([extra_column] if extra_column else []) + HEADER)
        for i, row in enumerate(rows):
            prefix = [extra_values[i]] if extra_column else []
            writer.writerow(prefix + [row.run_id, row.task, row.mode, row.seed,
                                      row.step, row.metric, format_value(row.value)])
