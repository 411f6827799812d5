"""SQLite registry of experiment runs."""

import os
import sqlite3
from datetime import datetime
from typing import List, Optional

from src.data.defaults import DEFAULT_RUNS_DB, RUNS_DB_ENV


class RunDatabase:
    """Records which runs were started and how they ended.

    Bookkeeping only; nothing here feeds back into training.
    """

    def __init__(self, db_path: Optional[str] = None):
        """Initialize database connection.

        Args:
            db_path: Path to SQLite database file (defaults to $SCREENER_RUNS_DB or data/runs.db)
        """
        self.db_path = db_path or os.getenv(RUNS_DB_ENV, DEFAULT_RUNS_DB)
        directory = os.path.dirname(self.db_path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        self._init_db()

    def _init_db(self):
        """Create tables if they don't exist."""
        with sqlite3.connect(self.db_path) as conn:
            cursor = conn.cursor()
            cursor.execute("""
                CREATE TABLE IF NOT EXISTS runs (
                    id INTEGER PRIMARY KEY AUTOINCREMENT,
                    run_id TEXT NOT NULL,
                    task TEXT NOT NULL,
                    mode TEXT NOT NULL,
                    seed INTEGER NOT NULL,
                    output_dir TEXT NOT NULL,
                    status TEXT NOT NULL,
                    started_at TEXT NOT NULL,
                    finished_at TEXT,
                    primary_metric TEXT,
                    final_value REAL,
                    error_message TEXT
                )
            """)
            cursor.execute("""
                CREATE INDEX IF NOT EXISTS idx_run_combination
                ON runs(task, mode, seed)
            """)
            conn.commit()

    def record_start(self, run_id: str, task: str, mode: str, seed: int, output_dir: str) -> int:
        """Insert a ``running`` row.

        Returns:
            Row id to pass to ``record_finish``
        """
        with sqlite3.connect(self.db_path) as conn:
            cursor = conn.cursor()
            cursor.execute("""
                INSERT INTO runs (run_id, task, mode, seed, output_dir, status, started_at)
                VALUES (?, ?, ?, ?, ?, 'running', ?)
            """, (run_id, task, mode, seed, output_dir, datetime.now().isoformat()))
            conn.commit()
            return cursor.lastrowid

    def record_finish(
        self,
        row_id: int,
        status: str,
        primary_metric: Optional[str] = None,
        final_value: Optional[float] = None,
        error_message: Optional[str] = None
    ):
        """Close a run row.

        Args:
            row_id: Id returned by ``record_start``
            status: "done" or "failed"
            primary_metric: Name of the headline metric
            final_value: Its last reported value
            error_message: Failure diagnostic
        """
        with sqlite3.connect(self.db_path) as conn:
            conn.execute("""
                UPDATE runs
                SET status = ?, finished_at = ?, primary_metric = ?, final_value = ?, error_message = ?
                WHERE id = ?
            """, (status, datetime.now().isoformat(), primary_metric, final_value, error_message, row_id))
            conn.commit()

    def recent_runs(self, limit: int = 10) -> List[dict]:
        with sqlite3.connect(self.db_path) as conn:
            conn.row_factory = sqlite3.Row
            cursor = conn.execute("""
                SELECT run_id, task, mode, seed, output_dir, status, started_at,
                       finished_at, primary_metric, final_value, error_message
                FROM runs ORDER BY id DESC LIMIT ?
            """, (limit,))
            return [dict(row) for row in cursor.fetchall()]

    def get_stats(self) -> dict:
        """Get run statistics.

        Returns:
            Dictionary with statistics
        """
        with sqlite3.connect(self.db_path) as conn:
            cursor = conn.cursor()

            cursor.execute("SELECT COUNT(*) FROM runs")
            total = cursor.fetchone()[0]

            cursor.execute("SELECT status, COUNT(*) FROM runs GROUP BY status")
            by_status = dict(cursor.fetchall())

            cursor.execute("SELECT task, COUNT(*) FROM runs GROUP BY task")
            by_task = dict(cursor.fetchall())

            success_rate = (by_status.get('done', 0) / total * 100) if total > 0 else 0

            return {
                'total_runs': total,
                'by_status': by_status,
                'by_task': by_task,
                'success_rate': round(success_rate, 2)
            }
