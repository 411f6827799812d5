"""Deterministic cart-pole dynamics (Cart-pole-v0 constants).

Integration is semi-implicit Euler: velocities are advanced first and the
new velocities move the positions.
"""

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from src.data.defaults import CARTPOLE
from src.errors import EpisodeFinishedError


@dataclass(frozen=True)
class CartPolePhysics:
    gravity: float = CARTPOLE["gravity"]
    mass_cart: float = CARTPOLE["mass_cart"]
    mass_pole: float = CARTPOLE["mass_pole"]
    half_length: float = CARTPOLE["half_length"]
    force_mag: float = CARTPOLE["force_mag"]
    tau: float = CARTPOLE["tau"]
    x_threshold: float = CARTPOLE["x_threshold"]
    theta_threshold: float = CARTPOLE["theta_threshold"]
    max_episode_steps: int = CARTPOLE["max_episode_steps"]
    reset_bound: float = CARTPOLE["reset_bound"]

    @property
    def total_mass(self) -> float:
        return self.mass_cart + self.mass_pole

    @property
    def pole_mass_length(self) -> float:
        return self.mass_pole * self.half_length


@dataclass(frozen=True)
class CartPoleState:
    x: float
    x_dot: float
    theta: float
    theta_dot: float
    steps_elapsed: int = 0

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.x_dot, self.theta, self.theta_dot], dtype=np.float64)

    def mirrored(self) -> "CartPoleState":
        return CartPoleState(-self.x, -self.x_dot, -self.theta, -self.theta_dot, self.steps_elapsed)


@dataclass(frozen=True)
class StepResult:
    next_state: CartPoleState
    reward: float
    terminated: bool
    truncated: bool

    @property
    def done(self) -> bool:
        return self.terminated or self.truncated


def is_failed(state: CartPoleState, physics: CartPolePhysics) -> bool:
    return abs(state.x) > physics.x_threshold or abs(state.theta) > physics.theta_threshold


def is_finished(state: CartPoleState, physics: CartPolePhysics) -> bool:
    return is_failed(state, physics) or state.steps_elapsed >= physics.max_episode_steps


def env_reset(seed=None, physics: Optional[CartPolePhysics] = None,
              rng: Optional[np.random.Generator] = None) -> CartPoleState:
    """Fresh state with each component uniform in [-bound, bound]."""
    physics = physics or CartPolePhysics()
    rng = rng if rng is not None else np.random.default_rng(seed)
    bound = physics.reset_bound
    x, x_dot, theta, theta_dot = rng.uniform(-bound, bound, size=4)
    return CartPoleState(float(x), float(x_dot), float(theta), float(theta_dot), 0)


def env_step(state: CartPoleState, action: int, physics: Optional[CartPolePhysics] = None) -> StepResult:
    """Advance one tick of ``tau`` seconds.

    Args:
        state: Current state; must not be finished
        action: 0 pushes left, 1 pushes right
        physics: Constants

    Returns:
        StepResult with unit reward
    """
    physics = physics or CartPolePhysics()
    if is_finished(state, physics):
        raise EpisodeFinishedError("Cannot step a finished episode; call reset first")
    if action not in (0, 1):
        raise ValueError(f"Action must be 0 or 1, got {action}")

    force = physics.force_mag if action == 1 else -physics.force_mag
    cos_theta = math.cos(state.theta)
    sin_theta = math.sin(state.theta)

    temp = (force + physics.pole_mass_length * state.theta_dot ** 2 * sin_theta) / physics.total_mass
    theta_acc = (physics.gravity * sin_theta - cos_theta * temp) / (
        physics.half_length * (4.0 / 3.0 - physics.mass_pole * cos_theta ** 2 / physics.total_mass)
    )
    x_acc = temp - physics.pole_mass_length * theta_acc * cos_theta / physics.total_mass

    x_dot = state.x_dot + physics.tau * x_acc
    x = state.x + physics.tau * x_dot
    theta_dot = state.theta_dot + physics.tau * theta_acc
    theta = state.theta + physics.tau * theta_dot

    next_state = CartPoleState(x, x_dot, theta, theta_dot, state.steps_elapsed + 1)
    terminated = is_failed(next_state, physics)
    truncated = not terminated and next_state.steps_elapsed >= physics.max_episode_steps
    return StepResult(next_state, 1.0, terminated, truncated)


class CartPole:
    """Stateful wrapper around ``env_reset`` / ``env_step``.

    Args:
        rng: Generator used for resets
        physics: Constants
        force_mag: Override the push force (0.0 lets the pole fall freely)
    """

    def __init__(self, rng: Optional[np.random.Generator] = None,
                 physics: Optional[CartPolePhysics] = None, force_mag: Optional[float] = None):
        physics = physics or CartPolePhysics()
        if force_mag is not None:
            physics = replace(physics, force_mag=force_mag)
        self.physics = physics
        self.rng = rng if rng is not None else np.random.default_rng()
        self.state: Optional[CartPoleState] = None

    def reset(self) -> CartPoleState:
        self.state = env_reset(physics=self.physics, rng=self.rng)
        return self.state

    def step(self, action: int) -> StepResult:
        if self.state is None:
            raise EpisodeFinishedError("Call reset before step")
        result = env_step(self.state, action, self.physics)
        self.state = result.next_state
        return result
