"""Headless mock of the engine editor scripting surface."""

__version__ = "0.1.0"
