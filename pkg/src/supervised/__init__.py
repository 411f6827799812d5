"""Supervised classification harness: datasets, training modes and analyses."""
