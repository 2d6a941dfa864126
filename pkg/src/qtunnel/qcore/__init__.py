"""Circuit IR, statevector and density-matrix simulation, sampling."""

from .circuit import Circuit
from .density import DensityMatrix, NoiseModel, partial_trace, simulate_density
from .gates import Gate
from .measure import (
    CountsDistribution,
    Observable,
    execute,
    expectation,
    sample_counts,
)
from .statevector import StateVector, circuit_unitary, simulate_statevector

__all__ = [
    "Circuit",
    "CountsDistribution",
    "DensityMatrix",
    "Gate",
    "NoiseModel",
    "Observable",
    "StateVector",
    "circuit_unitary",
    "execute",
    "expectation",
    "partial_trace",
    "sample_counts",
    "simulate_density",
    "simulate_statevector",
]
