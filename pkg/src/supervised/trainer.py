"""Epoch loop for the supervised training modes.

Baseline and SN walk a shuffled permutation in mini-batches. PER and
PER_SN keep every training index resident in a prioritized pool (entering
at the maximum priority), draw ``N // batch_size`` stratified batches per
epoch and refresh each visited index to ``|loss| + epsilon``.
"""

from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Sequence

import numpy as np

from src.data import defaults
from src.nn.network import mlp
from src.nn.optimizers import Adam
from src.replay.prioritized_buffer import PrioritizedBuffer, priority_from_error
from src.screener.objective import ScreenerConfig
from src.screener.screener import build_screener
from src.screener.training import ClassificationObjective, joint_train_step, train_step
from src.supervised.analysis import WeightTracker, predict_classes
from src.supervised.datasets import Dataset
from src.utils import seeding
from src.utils.logger import StructuredLogger


@dataclass
class SupervisedConfig:
    mode: str = "Baseline"
    seed: int = 0
    learning_rate: float = defaults.LEARNING_RATE
    max_grad_norm: Optional[float] = None
    batch_size: int = defaults.BATCH_SIZE
    epochs: int = defaults.EPOCHS
    alpha_exp: float = defaults.PER_ALPHA
    epsilon: float = defaults.PER_EPSILON
    beta_start: float = defaults.BETA_START
    beta_end: float = defaults.BETA_END
    beta_anneal_steps: int = defaults.BETA_ANNEAL_STEPS
    main_hidden: Sequence[int] = field(default_factory=lambda: list(defaults.ARCHITECTURES["mnist"]["main"]))
    screener_hidden: Sequence[int] = field(default_factory=lambda: list(defaults.ARCHITECTURES["mnist"]["screener"]))
    screener: ScreenerConfig = field(default_factory=ScreenerConfig)
    track_samples: int = defaults.TRACK_SAMPLES

    def __post_init__(self):
        if self.mode not in defaults.SUPERVISED_MODES:
            raise ValueError(
                f"Unknown supervised mode: {self.mode}. Expected one of {defaults.SUPERVISED_MODES}"
            )

    @property
    def uses_screener(self) -> bool:
        return self.mode in ("SN", "PER_SN")

    @property
    def prioritized(self) -> bool:
        return self.mode in ("PER", "PER_SN")


@dataclass
class EpochMetrics:
    epoch: int
    mode: str
    seed: int
    test_accuracy: float
    train_loss_mean: Optional[float]
    mean_screener_weight: Optional[float]
    beta: Optional[float] = None
    test_weight_failures_mean: Optional[float] = None
    test_weight_successes_mean: Optional[float] = None


class SupervisedTrainer:
    """Owns the main network, optional screener and optional prioritized pool."""

    def __init__(self, config: SupervisedConfig, train: Dataset, test: Dataset,
                 logger: Optional[StructuredLogger] = None):
        self.config = config
        self.train_set = train
        self.test_set = test
        self.logger = logger
        self.objective = ClassificationObjective()

        streams = seeding.SeedStreams(config.seed)
        sizes = [train.input_dim, *config.main_hidden, train.num_classes]
        self.main = mlp(sizes, streams.generator(seeding.MAIN_INIT))
        self.optimizer = Adam(config.learning_rate, max_grad_norm=config.max_grad_norm)

        self.screener = None
        if config.uses_screener:
            self.screener = build_screener(
                train.input_dim,
                config.screener_hidden,
                streams.generator(seeding.SCREENER_INIT),
                config.screener,
                config.learning_rate,
            )

        self.pool = None
        if config.prioritized:
            self.pool = PrioritizedBuffer(
                capacity=len(train),
                alpha=config.alpha_exp,
                epsilon=config.epsilon,
                beta_start=config.beta_start,
                beta_end=config.beta_end,
                anneal_steps=config.beta_anneal_steps,
                rng=streams.generator(seeding.SAMPLING),
            )
            for index in range(len(train)):
                self.pool.push(index)

        self.shuffle_rng = streams.generator(seeding.SHUFFLE)
        self.tracker = None
        if self.screener is not None and config.track_samples > 0:
            count = min(config.track_samples, len(train))
            picks = streams.generator(seeding.TRACKING).choice(len(train), size=count, replace=False)
            self.tracker = WeightTracker(train.sample_ids[np.sort(picks)])
        self.step = 0

    def _batches(self) -> Iterator[tuple]:
        """Yield ``(indices, is_weights or None)`` for one epoch."""
        n = len(self.train_set)
        batch_size = self.config.batch_size
        if self.pool is None:
            order = self.shuffle_rng.permutation(n)
            for start in range(0, n, batch_size):
                yield order[start:start + batch_size], None
            return
        for _ in range(max(1, n // batch_size)):
            sample = self.pool.sample_batch(min(batch_size, n), step=self.step)
            yield sample.indices, sample.is_weights

    def run_epoch(self) -> tuple:
        losses: List[float] = []
        weights: List[float] = []
        for indices, factors in self._batches():
            inputs = self.train_set.inputs[indices]
            labels = self.train_set.labels[indices]
            if self.screener is not None:
                report = joint_train_step(self.main, self.optimizer, self.screener,
                                          inputs, labels, self.objective, factors)
                weights.append(report.mean_weight)
            else:
                report = train_step(self.main, self.optimizer, inputs, labels, self.objective, factors)
            if self.pool is not None:
                self.pool.update_priorities(
                    indices, priority_from_error(report.batch.raw_errors, self.config.epsilon)
                )
            losses.append(report.weighted_loss)
            self.step += 1
        mean_weight = float(np.mean(weights)) if weights else None
        return float(np.mean(losses)), mean_weight

    def evaluate(self) -> dict:
        """Test accuracy plus, with a screener, its mean weight on failures vs successes."""
        predictions = predict_classes(self.main, self.test_set.inputs)
        correct = predictions == self.test_set.labels
        result = {"test_accuracy": float(np.mean(correct))}
        if self.screener is not None:
            test_weights = self.screener.weights(self.test_set.inputs)
            if (~correct).any():
                result["test_weight_failures_mean"] = float(np.mean(test_weights[~correct]))
            if correct.any():
                result["test_weight_successes_mean"] = float(np.mean(test_weights[correct]))
        return result

    def train(self) -> Iterator[EpochMetrics]:
        """Run every epoch, yielding metrics after each one."""
        if self.tracker is not None:
            self.tracker.track(self.screener, self.train_set, 0)
        for epoch in range(1, self.config.epochs + 1):
            train_loss, mean_weight = self.run_epoch()
            evaluation = self.evaluate()
            if self.tracker is not None:
                self.tracker.track(self.screener, self.train_set, epoch)
            metrics = EpochMetrics(
                epoch=epoch,
                mode=self.config.mode,
                seed=self.config.seed,
                train_loss_mean=train_loss,
                mean_screener_weight=mean_weight,
                beta=self.pool.beta(self.step) if self.pool is not None else None,
                **evaluation,
            )
            if self.logger:
                self.logger.info(
                    f"Epoch {epoch}/{self.config.epochs} complete",
                    epoch=epoch,
                    test_accuracy=metrics.test_accuracy,
                    train_loss_mean=train_loss,
                )
            yield metrics


def train_supervised(config: SupervisedConfig, train: Dataset, test: Dataset,
                     logger: Optional[StructuredLogger] = None) -> Iterator[EpochMetrics]:
    return SupervisedTrainer(config, train, test, logger).train()
