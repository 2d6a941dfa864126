"""Quantum-tunneling simulation toolkit: circuits, simulators, compilation, mitigation."""

__version__ = "0.1.0"
