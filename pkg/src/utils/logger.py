"""Logging configuration and utilities."""

import json
import logging
import math
import os
from datetime import datetime
from typing import Any, Dict, List, Optional

from src.data.defaults import DEFAULT_LOG_DIR, LOG_DIR_ENV


def _jsonable(value: Any) -> Any:
    """Make numpy scalars and non-finite floats safe for json.dumps."""
    if hasattr(value, "item") and not isinstance(value, (list, dict, str)):
        try:
            value = value.item()
        except (TypeError, ValueError):
            return str(value)
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    return value


class StructuredLogger:
    """JSON-structured logger for monitoring training runs.

    Human-readable lines go to the console; every record is also appended as
    one JSON object per line to ``<log_dir>/<date>.log`` and, once a run has
    attached one, to that run's own log file.
    """

    def __init__(self, name: str = "screener", log_dir: Optional[str] = None):
        """Initialize logger.

        Args:
            name: Logger name
            log_dir: Directory for daily log files (defaults to $SCREENER_LOG_DIR or ./logs)
        """
        self.name = name
        self.log_dir = log_dir or os.getenv(LOG_DIR_ENV, DEFAULT_LOG_DIR)
        os.makedirs(self.log_dir, exist_ok=True)
        self.extra_files: List[str] = []

        self.logger = logging.getLogger(name)
        self.logger.setLevel(logging.INFO)

        # Prevent duplicate handlers
        if self.logger.handlers:
            return

        console_handler = logging.StreamHandler()
        console_handler.setLevel(logging.INFO)
        console_handler.setFormatter(logging.Formatter(
            '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
        ))
        self.logger.addHandler(console_handler)

    def attach_file(self, path: str):
        """Also mirror JSON records into ``path`` (e.g. a run's output directory)."""
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        if path not in self.extra_files:
            self.extra_files.append(path)

    def detach_file(self, path: str):
        if path in self.extra_files:
            self.extra_files.remove(path)

    def info(self, message: str, **kwargs):
        """Log info level message with structured data."""
        self._log('INFO', message, kwargs)

    def error(self, message: str, **kwargs):
        """Log error level message with structured data."""
        self._log('ERROR', message, kwargs)

    def warning(self, message: str, **kwargs):
        """Log warning level message with structured data."""
        self._log('WARNING', message, kwargs)

    def _daily_file(self) -> str:
        return os.path.join(self.log_dir, f"{datetime.now().strftime('%Y-%m-%d')}.log")

    def _log(self, level: str, message: str, data: Dict[str, Any]):
        log_entry = {
            'timestamp': datetime.now().isoformat(),
            'level': level,
            'message': message,
            **{key: _jsonable(value) for key, value in data.items()}
        }

        self.logger.log(getattr(logging, level), message)

        line = json.dumps(log_entry, ensure_ascii=False) + '\n'
        for path in [self._daily_file(), *self.extra_files]:
            with open(path, 'a', encoding='utf-8') as f:
                f.write(line)

    def log_run_start(self, run_id: str, **kwargs):
        """Log training run start."""
        self.info("=" * 50)
        self.info(f"Run {run_id} started", run_id=run_id, **kwargs)
        self.info("=" * 50)

    def log_run_end(self, run_id: str, success: bool, **kwargs):
        """Log training run end."""
        status = "SUCCESS" if success else "FAILED"
        self.info("=" * 50)
        self.info(f"Run {run_id} {status}", run_id=run_id, status=status, **kwargs)
        self.info("=" * 50)
