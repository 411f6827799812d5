"""Experiment runner: one config in, one run directory out."""

import os
from typing import Optional

from src.data.defaults import ARCHITECTURES, DONE_SENTINEL
from src.rl.agent import AgentConfig
from src.rl.trainer import train_agent
from src.screener.objective import ScreenerConfig
from src.supervised.analysis import (
    confusion_failures,
    extreme_weight_samples,
    per_sample_losses,
    predict_classes,
    weight_error_association,
)
from src.supervised.datasets import load_mnist, make_synthetic
from src.supervised.trainer import SupervisedConfig, SupervisedTrainer
from src.utils import seeding
from src.utils.config import ExperimentConfig, write_resolved_config
from src.utils.database import RunDatabase
from src.utils.exports import (
    CONFUSION_FAILURES_FILE,
    CONFUSION_FILE,
    PREDICTIONS_FILE,
    WEIGHT_TRACES_FILE,
    write_confusion,
    write_extremes,
    write_predictions,
    write_weight_traces,
)
from src.utils.logger import StructuredLogger
from src.utils.metrics import METRICS_FILE, MetricsWriter

RESOLVED_CONFIG_FILE = "resolved-config.txt"
RUN_LOG_FILE = "run.log"
SYNTHETIC_KIND = "two_gaussians_overlap"


def screener_config(config: ExperimentConfig) -> ScreenerConfig:
    return ScreenerConfig(
        margin=config.margin_M,
        l1_alpha=config.l1_alpha,
        blend_lambda=config.blend_lambda,
        error_cap=config.error_cap,
        pinned_weight=config.screener_pin,
    )


def agent_config(config: ExperimentConfig) -> AgentConfig:
    arch = ARCHITECTURES["cartpole"]
    return AgentConfig(
        mode=config.mode,
        seed=config.seed,
        gamma=config.gamma,
        batch_size=config.batch_size,
        learning_rate=config.lr,
        explore_start=config.explore_start,
        explore_end=config.explore_end,
        explore_decay_steps=config.explore_decay_steps,
        target_sync_interval=config.target_sync_interval,
        warmup_steps=config.warmup_steps,
        capacity=config.capacity,
        alpha_exp=config.alpha_exp,
        epsilon=config.epsilon,
        beta_start=config.beta_start,
        beta_end=config.beta_end,
        beta_anneal_steps=config.beta_anneal_steps,
        eval_interval=config.eval_interval,
        eval_episodes=config.eval_episodes,
        main_hidden=list(arch["main"]),
        screener_hidden=list(arch["screener"]),
        screener=screener_config(config),
    )


def supervised_config(config: ExperimentConfig) -> SupervisedConfig:
    arch = ARCHITECTURES[config.task]
    return SupervisedConfig(
        mode=config.mode,
        seed=config.seed,
        learning_rate=config.lr,
        batch_size=config.batch_size,
        epochs=config.epochs,
        alpha_exp=config.alpha_exp,
        epsilon=config.epsilon,
        beta_start=config.beta_start,
        beta_end=config.beta_end,
        beta_anneal_steps=config.beta_anneal_steps,
        main_hidden=list(arch["main"]),
        screener_hidden=list(arch["screener"]),
        screener=screener_config(config),
        track_samples=config.track_samples,
    )


def load_datasets(config: ExperimentConfig, data_dir: Optional[str] = None):
    """Train/test pair for a supervised task."""
    if config.task == "mnist":
        return load_mnist(data_dir, config.train_subset)
    streams = seeding.SeedStreams(config.seed)
    n = config.synthetic_n
    train = make_synthetic(SYNTHETIC_KIND, n, streams.integer_seed(seeding.DATA),
                           config.synthetic_overlap, split="train")
    test = make_synthetic(SYNTHETIC_KIND, max(4, n // 4), streams.integer_seed(seeding.DATA_TEST),
                          config.synthetic_overlap, split="test")
    return train.subset(config.train_subset), test


class ExperimentRunner:
    """Runs one experiment and leaves a self-describing run directory.

    Layout of ``output_dir``:
        resolved-config.txt  every effective value
        metrics.csv          tidy learning curves
        run.log              JSON log of this run
        (supervised)         confusion CSVs, test predictions, weight traces, extremes
        DONE                 written last; its absence marks partial output
    """

    def __init__(
        self,
        config: ExperimentConfig,
        logger: Optional[StructuredLogger] = None,
        db: Optional[RunDatabase] = None,
        data_dir: Optional[str] = None
    ):
        """Initialize runner.

        Args:
            config: Validated experiment configuration
            logger: Logger (a default StructuredLogger when omitted)
            db: Run registry; runs are not recorded when omitted
            data_dir: MNIST directory override
        """
        self.config = config
        self.logger = logger or StructuredLogger()
        self.db = db
        self.data_dir = data_dir
        self.output_dir = config.resolved_output_dir
        self.final_value: Optional[float] = None
        self.error: Optional[Exception] = None

    def path(self, name: str) -> str:
        return os.path.join(self.output_dir, name)

    def run(self) -> int:
        """Execute the run.

        Returns:
            Process exit code (0 on success)
        """
        cfg = self.config
        os.makedirs(self.output_dir, exist_ok=True)
        done_path = self.path(DONE_SENTINEL)
        if os.path.exists(done_path):
            os.remove(done_path)

        run_log = self.path(RUN_LOG_FILE)
        self.logger.attach_file(run_log)
        self.logger.log_run_start(cfg.run_id, task=cfg.task, mode=cfg.mode, seed=cfg.seed,
                                  output_dir=self.output_dir)
        row_id = self.db.record_start(cfg.run_id, cfg.task, cfg.mode, cfg.seed, self.output_dir) if self.db else None

        try:
            self.logger.info("Step 1/4: Writing resolved configuration")
            write_resolved_config(cfg, self.path(RESOLVED_CONFIG_FILE))

            self.logger.info(f"Step 2/4: Training {cfg.task} in mode {cfg.mode}")
            with MetricsWriter(self.path(METRICS_FILE), cfg.run_id, cfg.task, cfg.mode, cfg.seed) as writer:
                if cfg.task == "cartpole":
                    self._run_cartpole(writer)
                    self.logger.info("Step 3/4: No extra artifacts for cartpole")
                else:
                    trainer = self._run_supervised(writer)
                    self.logger.info("Step 3/4: Exporting analysis artifacts")
                    self._export_supervised(trainer, writer)

            self.logger.info("Step 4/4: Marking run complete")
            with open(done_path, "w", encoding="utf-8") as f:
                f.write(cfg.run_id + "\n")

            if self.db:
                self.db.record_finish(row_id, "done", cfg.primary_metric, self.final_value)
            self.logger.log_run_end(cfg.run_id, success=True, primary_metric=cfg.primary_metric,
                                    final_value=self.final_value)
            return 0

        except Exception as e:
            self.error = e
            self.logger.error(
                "Run failed",
                error=str(e),
                error_type=type(e).__name__
            )
            if self.db:
                self.db.record_finish(row_id, "failed", cfg.primary_metric, self.final_value, str(e))
            self.logger.log_run_end(cfg.run_id, success=False, error=str(e))
            return 1

        finally:
            self.logger.detach_file(run_log)

    def _run_cartpole(self, writer: MetricsWriter):
        for metrics in train_agent(agent_config(self.config), self.config.total_steps, self.logger):
            writer.write_record(metrics.step, metrics)
            self.final_value = metrics.eval_mean_reward

    def _run_supervised(self, writer: MetricsWriter) -> SupervisedTrainer:
        train, test = load_datasets(self.config, self.data_dir)
        self.logger.info("Datasets loaded", train_size=len(train), test_size=len(test))
        trainer = SupervisedTrainer(supervised_config(self.config), train, test, self.logger)
        for metrics in trainer.train():
            writer.write_record(metrics.epoch, metrics)
            self.final_value = metrics.test_accuracy
        return trainer

    def _export_supervised(self, trainer: SupervisedTrainer, writer: MetricsWriter):
        cfg = self.config
        test = trainer.test_set
        matrix = confusion_failures(trainer.main, test)
        write_confusion(self.path(CONFUSION_FILE), matrix.counts)
        write_confusion(self.path(CONFUSION_FAILURES_FILE), matrix.failures().counts)
        write_predictions(self.path(PREDICTIONS_FILE), test.sample_ids, test.labels,
                          predict_classes(trainer.main, test.inputs))

        if trainer.screener is None:
            return
        if trainer.tracker is not None:
            write_weight_traces(self.path(WEIGHT_TRACES_FILE), trainer.tracker.rows())
        highest, lowest = extreme_weight_samples(trainer.screener, trainer.train_set, cfg.extreme_k)
        write_extremes(self.output_dir, highest, lowest, trainer.train_set.image_shape)

        if len(trainer.train_set) < 10:
            return
        association = weight_error_association(
            per_sample_losses(trainer.main, trainer.train_set),
            trainer.screener.weights(trainer.train_set.inputs),
            trainer.train_set.hard,
        )
        step = cfg.epochs
        writer.write(step, "weight_loss_spearman", association.spearman)
        writer.write(step, "top_decile_weight", association.top_decile_weight)
        writer.write(step, "bottom_decile_weight", association.bottom_decile_weight)
        writer.write(step, "hard_weight_mean", association.hard_weight)
        writer.write(step, "easy_weight_mean", association.easy_weight)
