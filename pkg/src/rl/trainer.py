"""Cart-pole training loop emitting periodic evaluation metrics."""

from dataclasses import dataclass
from typing import Iterator, List, Optional

import numpy as np

from src.rl.agent import AgentConfig, DDQNAgent, Transition
from src.rl.cartpole import CartPole, CartPolePhysics, env_reset, env_step
from src.nn.network import Network
from src.utils import seeding
from src.utils.logger import StructuredLogger


@dataclass
class RLMetrics:
    step: int
    mode: str
    seed: int
    eval_mean_reward: float
    train_loss_mean: Optional[float]
    mean_screener_weight: Optional[float]
    epsilon: float
    beta: Optional[float]


def evaluate_greedy(q_net: Network, episodes: int, rng: np.random.Generator,
                    physics: Optional[CartPolePhysics] = None) -> float:
    """Mean undiscounted return of the greedy policy."""
    physics = physics or CartPolePhysics()
    total = 0.0
    for _ in range(episodes):
        state = env_reset(physics=physics, rng=rng)
        while True:
            action = int(np.argmax(q_net.predict(state.as_array())))
            result = env_step(state, action, physics)
            total += result.reward
            if result.done:
                break
            state = result.next_state
    return total / episodes


def _mean(values: List[float]) -> Optional[float]:
    return float(np.mean(values)) if values else None


def train_agent(config: AgentConfig, total_steps: int,
                logger: Optional[StructuredLogger] = None) -> Iterator[RLMetrics]:
    """Run ``total_steps`` environment steps, yielding metrics every ``eval_interval`` and at the end."""
    streams = seeding.SeedStreams(config.seed)
    agent = DDQNAgent(config, streams, logger)
    env = CartPole(rng=streams.generator(seeding.ENV))
    eval_rng = streams.generator(seeding.EVALUATION)

    state = env.reset()
    window_losses: List[float] = []
    window_weights: List[float] = []

    for step in range(1, total_steps + 1):
        observation = state.as_array()
        action = agent.act(observation, step)
        result = env.step(action)
        agent.remember(Transition(observation, action, result.reward,
                                  result.next_state.as_array(), result.terminated))

        report = agent.learn(step)
        if report is not None:
            window_losses.append(report.weighted_loss)
            if agent.screener is not None:
                window_weights.append(report.mean_weight)

        if step % config.target_sync_interval == 0:
            agent.sync_target()

        if result.done:
            state = env.reset()
        else:
            state = result.next_state

        if step % config.eval_interval == 0 or step == total_steps:
            eval_reward = evaluate_greedy(agent.online, config.eval_episodes, eval_rng, env.physics)
            metrics = RLMetrics(
                step=step,
                mode=config.mode,
                seed=config.seed,
                eval_mean_reward=eval_reward,
                train_loss_mean=_mean(window_losses),
                mean_screener_weight=_mean(window_weights),
                epsilon=agent.exploration_rate(step),
                beta=agent.buffer.beta(step) if config.prioritized else None,
            )
            if logger:
                logger.info(
                    "Evaluation",
                    step=step,
                    mode=config.mode,
                    eval_mean_reward=eval_reward,
                    train_loss_mean=metrics.train_loss_mean,
                )
            window_losses, window_weights = [], []
            yield metrics
