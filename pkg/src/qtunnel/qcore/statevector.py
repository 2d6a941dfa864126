from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import Circuit
from .gates import Gate, diagonal_phases, gate_matrix

NORM_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class StateVector:
    """Amplitudes in little-endian order: qubit 0 is the least significant bit."""

    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        n = int(round(np.log2(a.size))) if a.size else -1
        if a.size < 2 or 2**n != a.size:
            raise ValueError("amplitude count must be a power of two >= 2")
        if abs(np.vdot(a, a).real - 1.0) > NORM_TOL:
            raise ValueError("state is not normalized")
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)

    @property
    def n(self) -> int:
        return int(np.log2(self.amplitudes.size))

    @classmethod
    def zero(cls, n: int) -> "StateVector":
        a = np.zeros(2**n, dtype=complex)
        a[0] = 1
        return cls(a)

    @classmethod
    def basis(cls, n: int, index: int) -> "StateVector":
        a = np.zeros(2**n, dtype=complex)
        a[index] = 1
        return cls(a)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


def _axes(qubits, n: int) -> list[int]:
    # reshape([2]*n) puts qubit n-1 on axis 0; gate matrix is MSB-first over reversed(qubits)
    return [n - 1 - q for q in reversed(qubits)]


def apply_gate(psi: np.ndarray, gate: Gate, n: int) -> np.ndarray:
    """Apply a unitary gate to ``psi`` of shape (2^n,) or (2^n, batch)."""
    batch = psi.shape[1:]
    t = psi.reshape([2] * n + list(batch))
    k = gate.arity
    ph = diagonal_phases(gate)
    axes = _axes(gate.qubits, n)
    if ph is not None:
        factor = np.exp(1j * ph).reshape([2] * k)
        # factor axes are MSB-first over reversed(qubits), matching ``axes`` order
        shape = [1] * (n + len(batch))
        order = np.argsort(axes)
        f = np.transpose(factor, order)
        for ax in axes:
            shape[ax] = 2
        return (t * f.reshape(shape)).reshape(psi.shape)
    m = gate_matrix(gate).reshape([2] * (2 * k))
    out = np.tensordot(m, t, axes=(list(range(k, 2 * k)), axes))
    out = np.moveaxis(out, list(range(k)), axes)
    return out.reshape(psi.shape)


def _check_unitary_circuit(circuit: Circuit):
    if circuit.has_measurements:
        raise ValueError("circuit contains MEASURE; simulate circuit.unitary_part() instead")


def simulate_statevector(circuit: Circuit, initial: StateVector | None = None) -> StateVector:
    _check_unitary_circuit(circuit)
    n = circuit.num_qubits
    if initial is None:
        psi = StateVector.zero(n).amplitudes.copy()
    else:
        if initial.n != n:
            raise ValueError(f"initial state has {initial.n} qubits, circuit has {n}")
        psi = initial.amplitudes.copy()
    for g in circuit.gates:
        psi = apply_gate(psi, g, n)
    return StateVector(psi)


def circuit_unitary(circuit: Circuit) -> np.ndarray:
    _check_unitary_circuit(circuit)
    n = circuit.num_qubits
    u = np.eye(2**n, dtype=complex)
    for g in circuit.gates:
        u = apply_gate(u, g, n)
    return u
