"""Simulation of a layered stack for entanglement-based quantum networks."""

__version__ = "0.1.0"
