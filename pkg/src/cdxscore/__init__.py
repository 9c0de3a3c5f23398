"""Scoring and timely-feedback platform for team-based cyber defence exercises."""

__version__ = "0.1.0"
