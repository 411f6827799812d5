"""Sample-weighting screener: objective, wrapper and joint training step."""
