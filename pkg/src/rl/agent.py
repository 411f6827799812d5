"""Double DQN agent with uniform, prioritized and screener-driven replay."""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from src.data import defaults
from src.nn.network import Network, mlp
from src.nn.optimizers import Adam
from src.replay.prioritized_buffer import (
    PrioritizedBuffer,
    priority_from_error,
    priority_from_screener,
)
from src.screener.objective import ScreenerConfig
from src.screener.screener import build_screener
from src.screener.training import StepReport, TDObjective, joint_train_step, train_step
from src.utils import seeding
from src.utils.logger import StructuredLogger

STATE_DIM = 4
NUM_ACTIONS = 2


@dataclass
class Transition:
    state: np.ndarray
    action: int
    reward: float
    next_state: np.ndarray
    done: bool


@dataclass
class AgentConfig:
    """Everything a DDQN run needs besides the environment."""

    mode: str = "Baseline"
    seed: int = 0
    gamma: float = defaults.GAMMA
    batch_size: int = defaults.BATCH_SIZE
    learning_rate: float = defaults.LEARNING_RATE
    max_grad_norm: Optional[float] = defaults.RL_MAX_GRAD_NORM
    huber_delta: float = defaults.HUBER_DELTA
    explore_start: float = defaults.EXPLORE_START
    explore_end: float = defaults.EXPLORE_END
    explore_decay_steps: int = defaults.EXPLORE_DECAY_STEPS
    target_sync_interval: int = defaults.TARGET_SYNC_INTERVAL
    warmup_steps: int = defaults.WARMUP_STEPS
    capacity: int = defaults.BUFFER_CAPACITY
    alpha_exp: float = defaults.PER_ALPHA
    epsilon: float = defaults.PER_EPSILON
    beta_start: float = defaults.BETA_START
    beta_end: float = defaults.BETA_END
    beta_anneal_steps: int = defaults.BETA_ANNEAL_STEPS
    eval_interval: int = defaults.EVAL_INTERVAL
    eval_episodes: int = defaults.EVAL_EPISODES
    main_hidden: Sequence[int] = field(default_factory=lambda: list(defaults.ARCHITECTURES["cartpole"]["main"]))
    screener_hidden: Sequence[int] = field(default_factory=lambda: list(defaults.ARCHITECTURES["cartpole"]["screener"]))
    screener: ScreenerConfig = field(default_factory=ScreenerConfig)

    def __post_init__(self):
        if self.mode not in defaults.MODES:
            raise ValueError(f"Unknown mode: {self.mode}. Expected one of {defaults.MODES}")
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError("gamma must lie in (0, 1]")

    @property
    def uses_screener(self) -> bool:
        return self.mode in defaults.SCREENER_MODES

    @property
    def prioritized(self) -> bool:
        return self.mode in defaults.PRIORITIZED_MODES


def select_action(q_net: Network, state, epsilon: float, rng: np.random.Generator) -> int:
    """Epsilon-greedy; ties in Q go to the lowest action index."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must lie in [0, 1]")
    if rng.random() < epsilon:
        return int(rng.integers(NUM_ACTIONS))
    return int(np.argmax(q_net.predict(state)))


def ddqn_td_targets(online_q: Network, target_q: Network, rewards, next_states, dones, gamma: float) -> np.ndarray:
    """``r + gamma * Q_target(s', argmax_a Q_online(s', a))``, or ``r`` at termination."""
    rewards = np.asarray(rewards, dtype=np.float64)
    dones = np.asarray(dones, dtype=bool)
    next_states = np.atleast_2d(next_states)
    best = np.argmax(online_q.predict(next_states), axis=1)
    evaluated = target_q.predict(next_states)[np.arange(len(best)), best]
    bootstrap = np.where(dones, 0.0, gamma * evaluated)
    return rewards + bootstrap


def ddqn_td_target(online_q: Network, target_q: Network, transition: Transition, gamma: float) -> float:
    return float(ddqn_td_targets(
        online_q, target_q, [transition.reward], [transition.next_state], [transition.done], gamma
    )[0])


class DDQNAgent:
    """Online/target Q-networks, replay memory and an optional screener.

    Modes:
        Baseline     uniform replay, unweighted loss
        SN           uniform replay, screener-weighted loss, screener co-trained
        PER          prioritized replay with IS-weighted loss
        PER_SN       prioritized replay, IS weight x screener weight
        SN_Sampling  priorities from the screener (alpha = 1), IS-weighted loss
    """

    def __init__(self, config: AgentConfig, streams: seeding.SeedStreams,
                 logger: Optional[StructuredLogger] = None):
        self.config = config
        self.logger = logger
        self.mode = config.mode

        self.online = mlp([STATE_DIM, *config.main_hidden, NUM_ACTIONS], streams.generator(seeding.MAIN_INIT))
        self.target = self.online.copy()
        self.optimizer = Adam(config.learning_rate, max_grad_norm=config.max_grad_norm)

        alpha = defaults.SN_SAMPLING_ALPHA if self.mode == "SN_Sampling" else config.alpha_exp
        self.buffer = PrioritizedBuffer(
            capacity=config.capacity,
            alpha=alpha,
            epsilon=config.epsilon,
            beta_start=config.beta_start,
            beta_end=config.beta_end,
            anneal_steps=config.beta_anneal_steps,
            rng=streams.generator(seeding.SAMPLING),
        )

        self.screener = None
        if config.uses_screener:
            self.screener = build_screener(
                STATE_DIM,
                config.screener_hidden,
                streams.generator(seeding.SCREENER_INIT),
                config.screener,
                config.learning_rate,
            )
        self.explore_rng = streams.generator(seeding.EXPLORATION)
        self.learn_steps = 0

    def exploration_rate(self, step: int) -> float:
        fraction = min(1.0, step / max(1, self.config.explore_decay_steps))
        return self.config.explore_start + fraction * (self.config.explore_end - self.config.explore_start)

    def act(self, state, step: int) -> int:
        return select_action(self.online, state, self.exploration_rate(step), self.explore_rng)

    def remember(self, transition: Transition):
        if self.mode == "SN_Sampling":
            weight = self.screener.weights(transition.state)[0]
            priority = priority_from_screener(weight, self.config.epsilon)
        elif self.mode in ("PER", "PER_SN"):
            priority = None
        else:
            priority = 1.0
        self.buffer.push(transition, priority)

    def ready(self) -> bool:
        return len(self.buffer) >= max(self.config.warmup_steps, self.config.batch_size)

    def sync_target(self):
        self.target.load_from(self.online)

    def learn(self, step: int) -> Optional[StepReport]:
        """One gradient step on a replayed batch; None during warm-up."""
        if not self.ready():
            return None
        cfg = self.config
        if cfg.prioritized:
            sample = self.buffer.sample_batch(cfg.batch_size, step=step)
            factors = sample.is_weights
        else:
            sample = self.buffer.sample_uniform(cfg.batch_size)
            factors = None

        batch: List[Transition] = sample.items
        states = np.stack([t.state for t in batch])
        actions = np.array([t.action for t in batch], dtype=np.int64)
        rewards = np.array([t.reward for t in batch], dtype=np.float64)
        next_states = np.stack([t.next_state for t in batch])
        dones = np.array([t.done for t in batch], dtype=bool)

        targets = ddqn_td_targets(self.online, self.target, rewards, next_states, dones, cfg.gamma)
        objective = TDObjective(actions, cfg.huber_delta)

        if self.mode in ("SN", "PER_SN"):
            report = joint_train_step(self.online, self.optimizer, self.screener, states, targets, objective, factors)
        else:
            report = train_step(self.online, self.optimizer, states, targets, objective, factors)

        if self.mode == "SN_Sampling":
            report.mean_weight = float(np.mean(self.screener.weights(states)))
            report.screener_loss = self.screener.update(states, report.batch.raw_errors)
            priorities = priority_from_screener(self.screener.weights(states), cfg.epsilon)
            self.buffer.update_priorities(sample.indices, priorities)
        elif self.mode in ("PER", "PER_SN"):
            priorities = priority_from_error(report.batch.raw_errors, cfg.epsilon)
            self.buffer.update_priorities(sample.indices, priorities)

        self.learn_steps += 1
        return report
