"""Curriculum-learning training engine with an attached sample-weighting screener."""

__version__ = "0.1.0"
