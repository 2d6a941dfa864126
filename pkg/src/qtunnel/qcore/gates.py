"""Gate kinds, their matrices, and per-gate transforms (inverse, conjugate).

Matrix convention: a k-qubit gate acting on ``qubits = (q0, q1, ...)`` is a
2^k x 2^k matrix indexed little-endian over its own qubits, i.e. row/column
``b = x_{q0} + 2 x_{q1} + ...``. For CX/CP the first qubit is the control.
DIAG phases follow the same ordering.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

ONE_QUBIT = {"X", "SX", "SXDG", "H", "RZ", "P"}
TWO_QUBIT = {"CX", "CZ", "CP", "SWAP"}
# DIAG/QFT/IQFT take any arity; MEASURE is terminal and non-unitary.
VARIADIC = {"DIAG", "QFT", "IQFT"}
KINDS = ONE_QUBIT | TWO_QUBIT | VARIADIC | {"MEASURE"}

_NPARAMS = {"RZ": 1, "P": 1, "CP": 1}
DIAGONAL = {"RZ", "P", "CZ", "CP", "DIAG"}


@dataclass(frozen=True)
class Gate:
    name: str
    qubits: tuple[int, ...]
    params: tuple[float, ...] = ()
    phases: tuple[float, ...] | None = None
    clbits: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        object.__setattr__(self, "clbits", tuple(int(c) for c in self.clbits))
        if self.phases is not None:
            object.__setattr__(self, "phases", tuple(float(p) for p in self.phases))
        if self.name not in KINDS:
            raise ValueError(f"unknown gate kind {self.name!r}")
        if len(set(self.qubits)) != len(self.qubits) or not self.qubits:
            raise ValueError(f"{self.name}: qubit indices must be distinct and non-empty")
        if any(q < 0 for q in self.qubits):
            raise ValueError(f"{self.name}: negative qubit index")
        if self.name in ONE_QUBIT and len(self.qubits) != 1:
            raise ValueError(f"{self.name} acts on exactly one qubit")
        if self.name in TWO_QUBIT and len(self.qubits) != 2:
            raise ValueError(f"{self.name} acts on exactly two qubits")
        if len(self.params) != _NPARAMS.get(self.name, 0):
            raise ValueError(f"{self.name} expects {_NPARAMS.get(self.name, 0)} params")
        if not all(np.isfinite(self.params)):
            raise ValueError(f"{self.name}: non-finite angle")
        if self.name == "DIAG":
            if self.phases is None or len(self.phases) != 2 ** len(self.qubits):
                raise ValueError("DIAG needs exactly 2^arity phases")
        elif self.phases is not None:
            raise ValueError(f"{self.name} does not take phases")
        if self.name == "MEASURE":
            if len(self.qubits) != 1 or len(self.clbits) != 1:
                raise ValueError("MEASURE maps one qubit to one classical bit")
        elif self.clbits:
            raise ValueError(f"{self.name} has no classical bits")

    @property
    def arity(self) -> int:
        return len(self.qubits)

    @property
    def is_unitary(self) -> bool:
        return self.name != "MEASURE"

    def remap(self, mapping) -> "Gate":
        return Gate(self.name, tuple(mapping[q] for q in self.qubits), self.params, self.phases, self.clbits)

    def to_dict(self) -> dict:
        d = {"name": self.name, "qubits": list(self.qubits), "params": list(self.params)}
        if self.phases is not None:
            d["phases"] = list(self.phases)
        if self.clbits:
            d["clbits"] = list(self.clbits)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Gate":
        return cls(
            d["name"],
            tuple(d["qubits"]),
            tuple(d.get("params", ())),
            tuple(d["phases"]) if d.get("phases") is not None else None,
            tuple(d.get("clbits", ())),
        )


# -- constructors -----------------------------------------------------------

def x(q): return Gate("X", (q,))
def sx(q): return Gate("SX", (q,))
def sxdg(q): return Gate("SXDG", (q,))
def h(q): return Gate("H", (q,))
def rz(theta, q): return Gate("RZ", (q,), (theta,))
def p(theta, q): return Gate("P", (q,), (theta,))
def cx(c, t): return Gate("CX", (c, t))
def cz(a, b): return Gate("CZ", (a, b))
def cp(theta, c, t): return Gate("CP", (c, t), (theta,))
def swap(a, b): return Gate("SWAP", (a, b))
def diag(phases, qubits): return Gate("DIAG", tuple(qubits), phases=tuple(phases))
def qft(qubits): return Gate("QFT", tuple(qubits))
def iqft(qubits): return Gate("IQFT", tuple(qubits))
def measure(q, c): return Gate("MEASURE", (q,), clbits=(c,))


def ccx(c1: int, c2: int, t: int) -> list[Gate]:
    """Exact Toffoli as H/P/CX (T = P(pi/4))."""
    T, Tdg = np.pi / 4, -np.pi / 4
    return [
        h(t), cx(c2, t), p(Tdg, t), cx(c1, t), p(T, t), cx(c2, t), p(Tdg, t), cx(c1, t),
        p(T, c2), p(T, t), h(t), cx(c1, c2), p(T, c1), p(Tdg, c2), cx(c1, c2),
    ]


# -- matrices ---------------------------------------------------------------

_S2 = 1 / np.sqrt(2)
_FIXED = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "SX": 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]]),
    "SXDG": 0.5 * np.array([[1 - 1j, 1 + 1j], [1 + 1j, 1 - 1j]]),
    "H": _S2 * np.array([[1, 1], [1, -1]], dtype=complex),
    # little-endian over (control, target): index = c + 2 t
    "CX": np.array([[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], dtype=complex),
    "CZ": np.diag([1, 1, 1, -1]).astype(complex),
    "SWAP": np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex),
}


@lru_cache(maxsize=16)
def dft_matrix(n: int) -> np.ndarray:
    N = 2**n
    k = np.arange(N)
    return np.exp(2j * np.pi * np.outer(k, k) / N) / np.sqrt(N)


def diagonal_phases(gate: Gate) -> np.ndarray | None:
    """Phase angles of a diagonal gate, or None if the gate is not diagonal."""
    if gate.name == "RZ":
        t = gate.params[0]
        return np.array([-t / 2, t / 2])
    if gate.name == "P":
        return np.array([0.0, gate.params[0]])
    if gate.name == "CZ":
        return np.array([0.0, 0.0, 0.0, np.pi])
    if gate.name == "CP":
        return np.array([0.0, 0.0, 0.0, gate.params[0]])
    if gate.name == "DIAG":
        return np.asarray(gate.phases, dtype=float)
    return None


def gate_matrix(gate: Gate) -> np.ndarray:
    if gate.name in _FIXED:
        return _FIXED[gate.name]
    ph = diagonal_phases(gate)
    if ph is not None:
        return np.diag(np.exp(1j * ph))
    if gate.name == "QFT":
        return dft_matrix(gate.arity)
    if gate.name == "IQFT":
        return dft_matrix(gate.arity).conj().T
    raise ValueError(f"{gate.name} has no matrix")


# -- per-gate transforms ----------------------------------------------------

_SELF_INVERSE = {"X", "H", "CX", "CZ", "SWAP"}


def inverse(gate: Gate) -> Gate:
    """Single-gate exact inverse (no global phase slack)."""
    if gate.name in _SELF_INVERSE:
        return gate
    if gate.name in ("RZ", "P", "CP"):
        return Gate(gate.name, gate.qubits, (-gate.params[0],))
    if gate.name == "SX":
        return Gate("SXDG", gate.qubits)
    if gate.name == "SXDG":
        return Gate("SX", gate.qubits)
    if gate.name == "DIAG":
        return Gate("DIAG", gate.qubits, phases=tuple(-v for v in gate.phases))
    if gate.name == "QFT":
        return Gate("IQFT", gate.qubits)
    if gate.name == "IQFT":
        return Gate("QFT", gate.qubits)
    raise ValueError(f"{gate.name} is not invertible")


def conjugate(gate: Gate) -> list[Gate]:
    """Gates whose product is the elementwise complex conjugate of ``gate``.

    conj(SX) == SX^dagger exactly because SX is symmetric; conj(QFT) == IQFT.
    """
    if gate.name in _SELF_INVERSE:
        return [gate]
    if gate.name in ("RZ", "P", "CP", "DIAG", "SX", "SXDG", "QFT", "IQFT"):
        return [inverse(gate)]
    raise ValueError(f"cannot conjugate {gate.name}")
