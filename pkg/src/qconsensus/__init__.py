"""Induced graphs, optimal weights and simulation for continuous-time quantum consensus."""

__version__ = "0.1.0"
