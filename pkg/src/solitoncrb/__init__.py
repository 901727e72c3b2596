"""Quantum-limited position estimation of a dark matter-wave soliton."""

__version__ = "0.1.0"
