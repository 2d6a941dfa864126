from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .circuit import Circuit
from .gates import Gate
from .statevector import StateVector, _check_unitary_circuit, apply_gate

MAX_DENSITY_QUBITS = 10


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    entries: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("density matrix must be square")
        n = int(round(np.log2(m.shape[0])))
        if 2**n != m.shape[0] or n < 1:
            raise ValueError("dimension must be a power of two")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def n(self) -> int:
        return int(np.log2(self.entries.shape[0]))

    @classmethod
    def from_statevector(cls, psi: StateVector) -> "DensityMatrix":
        a = psi.amplitudes
        return cls(np.outer(a, a.conj()))

    def probabilities(self) -> np.ndarray:
        return np.clip(np.real(np.diag(self.entries)), 0.0, None)

    def check(self, tol: float = 1e-10) -> None:
        """Raise if Hermiticity, unit trace or positivity is violated."""
        m = self.entries
        if np.max(np.abs(m - m.conj().T)) > tol:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(m).real - 1) > tol:
            raise ValueError("density matrix trace != 1")
        if np.linalg.eigvalsh(m).min() < -1e-8:
            raise ValueError("density matrix is not positive semidefinite")


@dataclass(frozen=True)
class NoiseModel:
    """Per-gate depolarizing noise plus per-qubit readout confusion.

    ``readout`` maps a qubit to a 2x2 row-stochastic matrix R with
    R[a][b] = P(read b | qubit in a). Qubits not listed read out perfectly.
    """

    p1: float = 0.0
    p2: float = 0.0
    readout: dict = field(default_factory=dict)
    base_scale: float = 1.0

    def __post_init__(self):
        for name in ("p1", "p2"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")
        if self.base_scale <= 0:
            raise ValueError("base_scale must be positive")
        ro = {}
        for q, r in dict(self.readout).items():
            r = np.asarray(r, dtype=float)
            if r.shape != (2, 2) or np.any(r < 0) or np.any(r > 1) or np.max(np.abs(r.sum(axis=1) - 1)) > 1e-9:
                raise ValueError(f"readout matrix for qubit {q} must be 2x2 row-stochastic")
            ro[int(q)] = r
        object.__setattr__(self, "readout", ro)

    @classmethod
    def symmetric_readout(cls, flip: float, qubits: Sequence[int], **kw) -> "NoiseModel":
        r = [[1 - flip, flip], [flip, 1 - flip]]
        return cls(readout={q: r for q in qubits}, **kw)

    def gate_probability(self, gate: Gate, scale: float = 1.0) -> float:
        if gate.arity == 1:
            p = self.p1
        elif gate.arity == 2:
            p = self.p2
        else:
            # composite/diagonal gates wider than two qubits are noiseless stand-ins
            p = 0.0
        return float(min(1.0, max(0.0, scale * self.base_scale * p)))

    def without_readout(self) -> "NoiseModel":
        return NoiseModel(self.p1, self.p2, {}, self.base_scale)


def _labels(n: int):
    return list(range(n)), list(range(n, 2 * n))


def depolarize(rho: np.ndarray, qubits: Sequence[int], p: float, n: int) -> np.ndarray:
    """rho -> (1-p) rho + p * Tr_S(rho) (x) I_S / 2^k on the qubits S."""
    if p == 0:
        return rho
    t = rho.reshape([2] * (2 * n))
    rows, cols = _labels(n)
    traced_cols = list(cols)
    for q in qubits:
        traced_cols[n - 1 - q] = rows[n - 1 - q]
    keep = [rows[i] for i in range(n)] + [traced_cols[i] for i in range(n)]
    keep_out = [l for i, l in enumerate(rows) if (n - 1 - i) not in qubits] + [
        l for i, l in enumerate(cols) if (n - 1 - i) not in qubits
    ]
    reduced = np.einsum(t, keep, keep_out)
    ops = [reduced, keep_out]
    for q in qubits:
        ops += [np.eye(2) / 2, [rows[n - 1 - q], cols[n - 1 - q]]]
    mixed = np.einsum(*ops, rows + cols).reshape(rho.shape)
    return (1 - p) * rho + p * mixed


def apply_unitary_gate(rho: np.ndarray, gate: Gate, n: int) -> np.ndarray:
    a = apply_gate(rho, gate, n)  # U rho
    return apply_gate(a.conj().T.copy(), gate, n)  # U (U rho)^dagger = U rho U^dagger


def simulate_density(
    circuit: Circuit,
    noise: NoiseModel,
    scale: float = 1.0,
    initial: DensityMatrix | None = None,
) -> DensityMatrix:
    """Each gate is applied as a unitary channel followed by depolarizing on its support."""
    _check_unitary_circuit(circuit)
    if scale < 0:
        raise ValueError("scale must be non-negative")
    n = circuit.num_qubits
    if n > MAX_DENSITY_QUBITS:
        raise ValueError(f"density simulation capped at {MAX_DENSITY_QUBITS} qubits (got {n})")
    if initial is None:
        rho = np.zeros((2**n, 2**n), dtype=complex)
        rho[0, 0] = 1
    else:
        if initial.n != n:
            raise ValueError("initial density matrix width mismatch")
        rho = initial.entries.copy()
    for g in circuit.gates:
        rho = apply_unitary_gate(rho, g, n)
        rho = depolarize(rho, g.qubits, noise.gate_probability(g, scale), n)
    return DensityMatrix(rho)


def partial_trace(rho: DensityMatrix, keep: Sequence[int]) -> DensityMatrix:
    """Reduced state over ``keep``; keep[0] becomes the new qubit 0."""
    keep = list(keep)
    n = rho.n
    if not keep or len(set(keep)) != len(keep) or not all(0 <= q < n for q in keep):
        raise ValueError("keep must be a non-empty list of distinct qubit indices")
    t = rho.entries.reshape([2] * (2 * n))
    rows, cols = _labels(n)
    in_cols = list(cols)
    for q in range(n):
        if q not in keep:
            in_cols[n - 1 - q] = rows[n - 1 - q]
    out_rows = [rows[n - 1 - q] for q in reversed(keep)]
    out_cols = [cols[n - 1 - q] for q in reversed(keep)]
    m = np.einsum(t, rows + in_cols, out_rows + out_cols)
    d = 2 ** len(keep)
    return DensityMatrix(m.reshape(d, d))
