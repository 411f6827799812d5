#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""Command-line entry point: run, compare, fetch-mnist, runs."""

import argparse
import sys
from typing import Dict, List, Optional

from dotenv import load_dotenv

from src.data.defaults import MODES, TASKS
from src.data.mnist_fetch import MnistFetcher
from src.orchestrator import ExperimentRunner
from src.utils.compare import compare
from src.utils.config import parse_config
from src.utils.database import RunDatabase
from src.utils.logger import StructuredLogger


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="main.py",
        description="Curriculum-learning experiments with a sample-weighting screener network.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Run one experiment")
    run.add_argument("--config", help="Experiment file (key = value, or .yaml)")
    run.add_argument("--task", choices=TASKS)
    run.add_argument("--mode", choices=MODES)
    run.add_argument("--seed", type=int)
    run.add_argument("--out", help="Output directory (default runs/<run_id>)")

    cmp = sub.add_parser("compare", help="Summarize completed runs side by side")
    cmp.add_argument("run_dirs", nargs="+")
    cmp.add_argument("--threshold", action="append", default=[], metavar="NAME=VALUE",
                     help="Report the first step/epoch where NAME reaches VALUE (repeatable)")
    cmp.add_argument("--merged-csv", help="Write the aligned curves to this CSV")

    fetch = sub.add_parser("fetch-mnist", help="Download the MNIST IDX files")
    fetch.add_argument("--dest", help="Target directory (default $SCREENER_DATA_DIR or data/mnist)")

    runs = sub.add_parser("runs", help="Show the run registry")
    runs.add_argument("--limit", type=int, default=10)
    return parser


def parse_thresholds(items: List[str]) -> Dict[str, float]:
    thresholds = {}
    for item in items:
        name, sep, value = item.partition("=")
        if not sep or not name.strip():
            raise ValueError(f"Threshold must look like name=value, got '{item}'")
        thresholds[name.strip()] = float(value)
    return thresholds


def cmd_run(args, logger: StructuredLogger) -> int:
    config = parse_config(args.config, {
        "task": args.task,
        "mode": args.mode,
        "seed": args.seed,
        "output_dir": args.out,
    })

    print("\n" + "=" * 60)
    print(f"Experiment {config.run_id}")
    print(f"Output: {config.resolved_output_dir}")
    print("=" * 60 + "\n")

    runner = ExperimentRunner(config, logger=logger, db=RunDatabase())
    code = runner.run()
    if code != 0:
        print(f"\n[ERROR] Run failed: {runner.error}")
        print(f"  Partial output (no DONE sentinel) left in {runner.output_dir}")
        return code

    print("\n" + "=" * 60)
    print(f"Run completed: {config.primary_metric} = {runner.final_value}")
    print("=" * 60 + "\n")
    return 0


def cmd_compare(args, logger: StructuredLogger) -> int:
    result = compare(args.run_dirs, parse_thresholds(args.threshold), args.merged_csv, logger)
    for line in result.lines:
        print(line)
    return 0


def cmd_fetch(args, logger: StructuredLogger) -> int:
    paths = MnistFetcher(dest=args.dest, logger=logger).fetch()
    for key, path in paths.items():
        print(f"  {key}: {path}")
    return 0


def cmd_runs(args, logger: StructuredLogger) -> int:
    db = RunDatabase()
    stats = db.get_stats()
    print(f"Total runs: {stats['total_runs']}  success rate: {stats['success_rate']}%")
    for status, count in sorted(stats["by_status"].items()):
        print(f"  {status}: {count}")
    for row in db.recent_runs(args.limit):
        value = "-" if row["final_value"] is None else f"{row['final_value']:.4f}"
        print(f"  {row['started_at'][:19]}  {row['run_id']:<32} {row['status']:<8} "
              f"{row['primary_metric'] or '-'}={value}  {row['output_dir']}")
    return 0


COMMANDS = {
    "run": cmd_run,
    "compare": cmd_compare,
    "fetch-mnist": cmd_fetch,
    "runs": cmd_runs,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Parse arguments and dispatch a subcommand."""
    load_dotenv()
    args = build_parser().parse_args(argv)
    logger = StructuredLogger()

    try:
        return COMMANDS[args.command](args, logger)
    except Exception as e:
        print(f"\n[ERROR] {str(e)}")
        logger.error(f"{args.command} failed: {str(e)}", error_type=type(e).__name__)
        return 1


if __name__ == "__main__":
    sys.exit(main())
