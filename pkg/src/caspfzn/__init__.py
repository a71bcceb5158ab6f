"""Compile ground (constraint) answer set programs to FlatZinc."""

__version__ = "0.1.0"
