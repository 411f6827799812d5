"""Cart-pole environment and Double DQN agent."""
