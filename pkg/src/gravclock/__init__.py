"""Quantum clocks in a uniform gravitational field."""

__version__ = "0.1.0"
