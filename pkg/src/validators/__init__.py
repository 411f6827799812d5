"""Experiment configuration validation."""
