"""Experiment configuration and artifact persistence."""
