"""Learned initializations for repeated gradient-descent solves."""

__version__ = "0.1.0"
