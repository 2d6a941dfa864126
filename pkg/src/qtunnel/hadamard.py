"""Hadamard test separating Re(psi)^2 and Im(psi)^2 of a prepared state.

With psi = W|0>, the test ancilla h ends in

    |0> (psi + psi*) / 2 + |1> (psi* - psi) / 2

so P(h=0, x) = Re(psi_x)^2 and P(h=1, x) = Im(psi_x)^2. W* is W with every
gate replaced by its elementwise complex conjugate, in the same order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .qcore import Circuit, CountsDistribution, execute, simulate_statevector
from .qcore import gates as G
from .qcore.gates import Gate
from .qcore.measure import bitstring


def conjugate_circuit(base: Circuit) -> Circuit:
    """W*: simulate_statevector(W*) is the elementwise conjugate of simulate_statevector(W)."""
    if base.has_measurements:
        raise ValueError("base circuit must be measurement-free")
    out: list[Gate] = []
    for g in base.gates:
        out += G.conjugate(g)
    return base.replace(gates=tuple(out))


def _expand(g: Gate) -> list[Gate]:
    if g.name in ("QFT", "IQFT"):
        from .tunnel import qft_gates

        return qft_gates(list(g.qubits), inverse=g.name == "IQFT")
    return [g]


def controlled(g: Gate, c: int) -> list[Gate]:
    """Exact controlled version of one gate (global phase included)."""
    ph = G.diagonal_phases(g)
    if ph is not None:
        return [G.diag(np.concatenate([np.zeros(ph.size), ph]), g.qubits + (c,))]
    if g.name in ("QFT", "IQFT"):
        return [cg for sub in _expand(g) for cg in controlled(sub, c)]
    if g.name == "X":
        return [G.cx(c, g.qubits[0])]
    if g.name == "CX":
        return G.ccx(c, g.qubits[0], g.qubits[1])
    if g.name == "SWAP":
        a, b = g.qubits
        return [G.cx(b, a)] + G.ccx(c, a, b) + [G.cx(b, a)]
    if g.name in ("SX", "SXDG"):
        # SX = H P(pi/2) H
        t = g.qubits[0]
        ang = np.pi / 2 if g.name == "SX" else -np.pi / 2
        return [G.h(t), G.cp(ang, c, t), G.h(t)]
    if g.name == "H":
        t = g.qubits[0]
        return [G.p(np.pi / 2, t), G.h(t), G.p(np.pi / 4, t), G.cx(c, t), G.p(-np.pi / 4, t), G.h(t), G.p(-np.pi / 2, t)]
    raise ValueError(f"cannot control gate {g.name}")


def controlled_circuit(base: Circuit, c: int) -> list[Gate]:
    return [cg for g in base.gates for cg in controlled(g, c)]


@dataclass(frozen=True)
class HadamardTestCircuit:
    base: Circuit
    wrapped: Circuit
    working: int  # qubits 0..working-1 are measured into cr
    test_qubit: int

    @property
    def clbit_h(self) -> int:
        return self.working


def build_hadamard_test(base: Circuit, working: int | None = None) -> HadamardTestCircuit:
    """H(h), controlled-W, X(h), controlled-W*, H(h), then measure.

    The working register goes to classical bits 0..n-1 (cr) and h to bit n
    (hc), so hc is the leading character of every bitstring.
    """
    if base.has_measurements:
        raise ValueError("base circuit must be measurement-free")
    if working is None:
        working = base.metadata.get("working_qubits") or base.num_qubits
    if not 1 <= working <= base.num_qubits:
        raise ValueError("working register must fit in the base circuit")
    h = base.num_qubits
    width = h + 1
    wide = Circuit(width, base.gates)
    gates = [G.h(h)]
    gates += controlled_circuit(wide, h)
    gates.append(G.x(h))
    gates += controlled_circuit(conjugate_circuit(wide), h)
    gates.append(G.h(h))
    gates += [G.measure(q, q) for q in range(working)]
    gates.append(G.measure(h, working))
    meta = {"label": "hadamard_test", "working_qubits": working, "test_qubit": h}
    return HadamardTestCircuit(base, Circuit(width, gates, num_clbits=working + 1, metadata=meta), working, h)


@dataclass(frozen=True)
class ReImDistributions:
    re: dict
    im: dict
    shots: int

    def total(self) -> float:
        return sum(self.re.values()) + sum(self.im.values())

    def to_dict(self) -> dict:
        return {"re": dict(self.re), "im": dict(self.im), "shots": self.shots}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def extract_re_im(counts: CountsDistribution) -> ReImDistributions:
    """Split on the leading (hc) bit; masses are divided by the total shot count."""
    if counts.width < 2:
        raise ValueError("counts need the hc bit plus at least one working bit")
    re: dict[str, float] = {}
    im: dict[str, float] = {}
    for key, c in counts.counts.items():
        (re if key[0] == "0" else im)[key[1:]] = c / counts.shots
    return ReImDistributions(dict(sorted(re.items())), dict(sorted(im.items())), counts.shots)


def exact_re_im(base: Circuit, working: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Re^2 and Im^2 of the working-register amplitudes (other qubits projected on |0>)."""
    working = working or base.metadata.get("working_qubits") or base.num_qubits
    a = simulate_statevector(base).amplitudes[: 2**working]
    return a.real**2, a.imag**2


def run_hadamard_test(base: Circuit, shots: int, seed: int = 0, working: int | None = None) -> ReImDistributions:
    test = build_hadamard_test(base, working)
    return extract_re_im(execute(test.wrapped, shots, seed))


def as_vectors(d: ReImDistributions, width: int) -> tuple[np.ndarray, np.ndarray]:
    re = np.array([d.re.get(bitstring(k, width), 0.0) for k in range(2**width)])
    im = np.array([d.im.get(bitstring(k, width), 0.0) for k in range(2**width)])
    return re, im
