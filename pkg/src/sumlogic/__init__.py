"""Toolkit for sum logic: semantics, decision pipeline, and benchmarks."""

__version__ = "0.1.0"
