"""Readout error mitigation with a calibrated confusion matrix."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..qcore import Circuit, CountsDistribution
from ..qcore import gates as G
from ..qcore.measure import bitstring


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """M[v, u] = P(read v | prepared u); columns are distributions."""

    n: int
    matrix: np.ndarray
    mode: str = "correlated"

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (2**self.n, 2**self.n):
            raise ValueError(f"confusion matrix must be {2**self.n}x{2**self.n}")
        if np.any(m < -1e-12) or np.any(m > 1 + 1e-12):
            raise ValueError("confusion entries must lie in [0, 1]")
        if np.max(np.abs(m.sum(axis=0) - 1)) > 1e-9:
            raise ValueError("confusion columns must sum to 1")
        if self.mode not in ("correlated", "local"):
            raise ValueError(f"unknown calibration mode {self.mode!r}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def to_dict(self) -> dict:
        return {"n": self.n, "mode": self.mode, "matrix": self.matrix.tolist()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "ConfusionMatrix":
        return cls(d["n"], np.array(d["matrix"]), d.get("mode", "correlated"))


def calibration_circuit(n: int, state: int) -> Circuit:
    gates = [G.x(q) for q in range(n) if (state >> q) & 1]
    return Circuit(n, gates, metadata={"label": f"cal_{bitstring(state, n)}"}).measure_all()


def build_confusion_matrix(executor: Callable[[Circuit], CountsDistribution], n: int, shots: int, mode: str = "correlated") -> ConfusionMatrix:
    """Run basis-state preparations through ``executor`` and tabulate outcomes.

    ``executor(circuit, shots)`` must return counts over all n qubits.
    correlated: 2^n circuits. local: one |0..0> and one X_q circuit per qubit,
    combined as a Kronecker product.
    """
    if shots < 1:
        raise ValueError("calibration needs shots >= 1")
    if mode == "correlated":
        cols = [executor(calibration_circuit(n, u), shots).vector(n) for u in range(2**n)]
        return ConfusionMatrix(n, np.array(cols).T, mode)
    if mode != "local":
        raise ValueError(f"unknown calibration mode {mode!r}")
    M = np.ones((1, 1))
    for q in range(n):
        f = np.zeros((2, 2))
        for b in (0, 1):
            marg = executor(calibration_circuit(n, b << q), shots).marginal([q])
            f[:, b] = marg.vector(1)
        M = np.kron(f, M)  # qubit q is bit q of the index
    return ConfusionMatrix(n, M, mode)


@dataclass
class RemResult:
    probabilities: np.ndarray  # clipped, renormalized
    raw: np.ndarray  # pinv(M) p before clipping
    clipped_mass: float

    def as_dict(self, width: int) -> dict:
        return {bitstring(i, width): float(v) for i, v in enumerate(self.probabilities)}


def apply_rem(M: ConfusionMatrix, counts) -> RemResult:
    """p = pinv(M) p_observed, negatives clipped to 0, renormalized."""
    if isinstance(counts, CountsDistribution):
        if counts.width != M.n:
            raise ValueError(f"counts have {counts.width} bits, confusion matrix {M.n}")
        p = counts.vector(M.n)
    else:
        p = np.asarray(counts, dtype=float)
        if p.shape != (2**M.n,):
            raise ValueError("probability vector has the wrong length")
    raw = np.linalg.pinv(M.matrix) @ p
    clipped = np.clip(raw, 0, None)
    total = clipped.sum()
    if total <= 0:
        raise ValueError("mitigated distribution vanished after clipping")
    return RemResult(clipped / total, raw, float(np.clip(-raw, 0, None).sum()))


def total_variation(p, q) -> float:
    return 0.5 * float(np.sum(np.abs(np.asarray(p) - np.asarray(q))))
