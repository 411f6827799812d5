"""Frozen defaults and dataset acquisition."""
