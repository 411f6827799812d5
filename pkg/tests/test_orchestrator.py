import csv
import os

import pytest

from main import main, parse_thresholds
from src.data.defaults import DONE_SENTINEL, LOG_DIR_ENV, RUNS_DB_ENV
from src.errors import IncompatibleRunsError
from src.orchestrator import RESOLVED_CONFIG_FILE, RUN_LOG_FILE, ExperimentRunner, load_datasets
from src.utils.compare import compare
from src.utils.config import ExperimentConfig, parse_config
from src.utils.database import RunDatabase
from src.utils.exports import (
    CONFUSION_FAILURES_FILE,
    CONFUSION_FILE,
    EXTREMES_FILES,
    PREDICTIONS_FILE,
    WEIGHT_TRACES_FILE,
    write_predictions,
)
from src.utils.metrics import METRICS_FILE, MetricsWriter, read_metrics


def cartpole_config(output_dir, **overrides):
    settings = dict(task="cartpole", mode="PER_SN", seed=1, output_dir=str(output_dir), total_steps=300,
                    warmup_steps=64, batch_size=16, capacity=500, eval_interval=150, eval_episodes=1,
                    explore_decay_steps=200, target_sync_interval=50)
    settings.update(overrides)
    return ExperimentConfig(**settings)


def synthetic_config(output_dir, **overrides):
    settings = dict(task="synthetic", mode="SN", seed=0, output_dir=str(output_dir),
                    synthetic_n=200, epochs=2, track_samples=3, extreme_k=4)
    settings.update(overrides)
    return ExperimentConfig(**settings)


def fake_run(run_dir, run_id, curve, task="synthetic", metric="test_accuracy", done=True):
    os.makedirs(run_dir, exist_ok=True)
    with MetricsWriter(os.path.join(run_dir, METRICS_FILE), run_id, task, "Baseline", 0) as writer:
        for step, value in curve:
            writer.write(step, metric, value)
    if done:
        open(os.path.join(run_dir, DONE_SENTINEL), "w").close()
    return str(run_dir)


##### runner #####
def test_cartpole_runs_are_byte_identical(tmp_path, logger):
    paths = []
    for name in ("a", "b"):
        runner = ExperimentRunner(cartpole_config(tmp_path / name), logger=logger)
        assert runner.run() == 0
        paths.append(tmp_path / name / METRICS_FILE)
    first, second = (p.read_bytes() for p in paths)
    assert first == second
    steps = sorted({row.step for row in read_metrics(str(paths[0]))})
    assert steps == [150, 300]


def test_synthetic_run_leaves_complete_directory(tmp_path, logger):
    out = tmp_path / "run"
    db = RunDatabase(str(tmp_path / "runs.db"))
    runner = ExperimentRunner(synthetic_config(out), logger=logger, db=db)
    assert runner.run() == 0
    for name in (RESOLVED_CONFIG_FILE, RUN_LOG_FILE, METRICS_FILE, CONFUSION_FILE, CONFUSION_FAILURES_FILE,
                 PREDICTIONS_FILE, WEIGHT_TRACES_FILE, *EXTREMES_FILES.values(), DONE_SENTINEL):
        assert (out / name).exists(), name
    assert not (out / "extremes").exists()

    rows = read_metrics(str(out / METRICS_FILE))
    metrics = {row.metric for row in rows}
    assert {"test_accuracy", "train_loss_mean", "mean_screener_weight", "weight_loss_spearman"} <= metrics
    assert [r.step for r in rows if r.metric == "test_accuracy"] == [1, 2]

    with open(out / WEIGHT_TRACES_FILE, newline="") as f:
        traces = list(csv.DictReader(f))
    assert len(traces) == 3 * 3

    reloaded = parse_config(str(out / RESOLVED_CONFIG_FILE))
    assert reloaded.run_id == "synthetic-SN-s0"
    assert reloaded.synthetic_n == 200

    latest = db.recent_runs(1)[0]
    assert latest["status"] == "done"
    assert latest["final_value"] == runner.final_value


def test_baseline_run_skips_screener_artifacts(tmp_path, logger):
    out = tmp_path / "run"
    assert ExperimentRunner(synthetic_config(out, mode="PER"), logger=logger).run() == 0
    assert (out / PREDICTIONS_FILE).exists()
    assert not (out / WEIGHT_TRACES_FILE).exists()
    assert not (out / EXTREMES_FILES["highest"]).exists()


def test_missing_mnist_fails_without_sentinel(tmp_path, logger):
    out = tmp_path / "run"
    db = RunDatabase(str(tmp_path / "runs.db"))
    config = ExperimentConfig(task="mnist", mode="Baseline", output_dir=str(out))
    runner = ExperimentRunner(config, logger=logger, db=db, data_dir=str(tmp_path / "empty"))
    assert runner.run() == 1
    assert isinstance(runner.error, FileNotFoundError)
    assert not (out / DONE_SENTINEL).exists()
    assert (out / RESOLVED_CONFIG_FILE).exists()
    row = db.recent_runs(1)[0]
    assert row["status"] == "failed"
    assert "MNIST" in row["error_message"]


def test_stale_sentinel_is_removed(tmp_path, logger):
    out = tmp_path / "run"
    out.mkdir()
    (out / DONE_SENTINEL).write_text("old\n")
    config = ExperimentConfig(task="mnist", output_dir=str(out))
    ExperimentRunner(config, logger=logger, data_dir=str(tmp_path / "empty")).run()
    assert not (out / DONE_SENTINEL).exists()


def test_synthetic_datasets_follow_seed():
    first = load_datasets(ExperimentConfig(task="synthetic", synthetic_n=100, seed=4))
    second = load_datasets(ExperimentConfig(task="synthetic", synthetic_n=100, seed=4))
    other = load_datasets(ExperimentConfig(task="synthetic", synthetic_n=100, seed=5))
    assert (first[0].inputs == second[0].inputs).all()
    assert len(first[1]) == 25
    assert not (first[0].inputs == other[0].inputs).all()


##### compare #####
def test_identical_runs_report_identical_lines(tmp_path):
    curve = [(1, 0.5), (2, 0.8), (3, 0.9)]
    a = fake_run(tmp_path / "a", "synthetic-Baseline-s0", curve)
    b = fake_run(tmp_path / "b", "synthetic-Baseline-s0", curve)
    result = compare([a, b], {"test_accuracy": 0.8})
    assert len(result.lines) == 2
    assert result.lines[0] == result.lines[1]
    assert "final test_accuracy=0.9000" in result.lines[0]
    assert "best test_accuracy=0.9000" in result.lines[0]
    assert "test_accuracy>=0.8: epoch 2" in result.lines[0]
    assert result.truncated_to is None


def test_unequal_lengths_are_truncated(tmp_path):
    a = fake_run(tmp_path / "a", "synthetic-SN-s0", [(1, 0.5), (2, 0.6), (3, 0.99)])
    b = fake_run(tmp_path / "b", "synthetic-Baseline-s0", [(1, 0.4), (2, 0.7)])
    result = compare([a, b], {"test_accuracy": 0.95})
    assert result.truncated_to == 2
    assert result.lines[0] == "NOTE runs differ in length; aligned up to step 2"
    assert "final test_accuracy=0.6000" in result.lines[1]
    assert "test_accuracy>=0.95: never" in result.lines[1]


def test_incomplete_runs_are_reported(tmp_path):
    a = fake_run(tmp_path / "a", "synthetic-SN-s0", [(1, 0.5)])
    b = fake_run(tmp_path / "b", "synthetic-SN-s1", [(1, 0.6)])
    c = fake_run(tmp_path / "c", "synthetic-SN-s2", [(1, 0.7)], done=False)
    result = compare([a, b, c])
    assert result.incomplete == [c]
    assert any(line.startswith("INCOMPLETE") for line in result.lines)
    with pytest.raises(IncompatibleRunsError):
        compare([a, c])


def test_task_mismatch_is_rejected(tmp_path):
    a = fake_run(tmp_path / "a", "synthetic-SN-s0", [(1, 0.5)])
    b = fake_run(tmp_path / "b", "cartpole-SN-s0", [(500, 20.0)], task="cartpole", metric="eval_mean_reward")
    with pytest.raises(IncompatibleRunsError):
        compare([a, b])


def test_failure_overlap_and_merged_csv(tmp_path):
    a = fake_run(tmp_path / "a", "synthetic-SN-s0", [(1, 0.5), (2, 0.75)])
    b = fake_run(tmp_path / "b", "synthetic-Baseline-s0", [(1, 0.5), (2, 0.5)])
    write_predictions(os.path.join(a, PREDICTIONS_FILE), [0, 1, 2, 3], [0, 1, 0, 1], [0, 1, 0, 0])
    write_predictions(os.path.join(b, PREDICTIONS_FILE), [0, 1, 2, 3], [0, 1, 0, 1], [1, 1, 1, 0])
    merged = str(tmp_path / "merged.csv")
    result = compare([a, b], merged_csv=merged)
    assert "FAILURES synthetic-SN-s0 only=0  synthetic-Baseline-s0 only=2  both=1" in result.lines
    with open(merged, newline="") as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == 4
    assert {row["run_dir"] for row in rows} == {a, b}


def test_cartpole_thresholds_count_steps(tmp_path):
    curve = [(500, 50.0), (1000, 196.0)]
    a = fake_run(tmp_path / "a", "cartpole-PER-s0", curve, task="cartpole", metric="eval_mean_reward")
    b = fake_run(tmp_path / "b", "cartpole-PER-s1", curve, task="cartpole", metric="eval_mean_reward")
    result = compare([a, b], parse_thresholds(["eval_mean_reward=195"]))
    assert "eval_mean_reward>=195.0: step 1000" in result.lines[0]


##### command line #####
def test_parse_thresholds_rejects_garbage():
    assert parse_thresholds(["test_accuracy=0.97"]) == {"test_accuracy": 0.97}
    with pytest.raises(ValueError):
        parse_thresholds(["0.97"])


def test_cli_run_and_compare(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv(RUNS_DB_ENV, str(tmp_path / "runs.db"))
    monkeypatch.setenv(LOG_DIR_ENV, str(tmp_path / "logs"))
    config = tmp_path / "exp.cfg"
    config.write_text("task = synthetic\nsynthetic_n = 100\nepochs = 2\n", encoding="utf-8")
    for seed in ("0", "1"):
        code = main(["run", "--config", str(config), "--mode", "SN", "--seed", seed,
                     "--out", str(tmp_path / f"s{seed}")])
        assert code == 0
    assert main(["compare", str(tmp_path / "s0"), str(tmp_path / "s1")]) == 0
    output = capsys.readouterr().out
    assert "synthetic-SN-s0  final test_accuracy=" in output
    assert "synthetic-SN-s1  final test_accuracy=" in output
    assert main(["runs"]) == 0
    assert "Total runs: 2" in capsys.readouterr().out


def test_cli_reports_config_errors(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv(LOG_DIR_ENV, str(tmp_path / "logs"))
    config = tmp_path / "bad.cfg"
    config.write_text("task = mnist\nmode = SN_Sampling\n", encoding="utf-8")
    assert main(["run", "--config", str(config)]) == 1
    assert "line 2" in capsys.readouterr().out
