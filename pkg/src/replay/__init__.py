"""Prioritized experience replay."""
