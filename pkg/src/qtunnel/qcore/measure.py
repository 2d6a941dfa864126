"""Counts, observables, seeded sampling and a measuring executor.

Bitstrings render classical bit ``num_clbits - 1`` first and bit 0 last,
so a register measured qubit-for-bit reads like the state label |q_{n-1}...q_0>.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .circuit import Circuit
from .density import MAX_DENSITY_QUBITS, DensityMatrix, NoiseModel, simulate_density
from .statevector import StateVector, simulate_statevector


def bitstring(index: int, width: int) -> str:
    return format(index, f"0{width}b") if width else ""


@dataclass(frozen=True)
class CountsDistribution:
    counts: Mapping[str, int]
    shots: int | None = None

    def __post_init__(self):
        counts = {str(k): int(v) for k, v in self.counts.items() if int(v) != 0}
        total = sum(counts.values())
        shots = total if self.shots is None else int(self.shots)
        if any(v < 0 for v in counts.values()):
            raise ValueError("negative count")
        if total != shots:
            raise ValueError(f"counts sum to {total}, expected {shots} shots")
        widths = {len(k) for k in counts}
        if len(widths) > 1:
            raise ValueError("bitstrings of mixed width")
        if any(set(k) - {"0", "1"} for k in counts):
            raise ValueError("bitstrings must contain only 0/1")
        object.__setattr__(self, "counts", dict(sorted(counts.items())))
        object.__setattr__(self, "shots", shots)

    @property
    def width(self) -> int:
        return len(next(iter(self.counts))) if self.counts else 0

    def probabilities(self) -> dict[str, float]:
        return {k: v / self.shots for k, v in self.counts.items()}

    def vector(self, width: int | None = None) -> np.ndarray:
        """Probability vector indexed by int(bitstring, 2)."""
        w = self.width if width is None else width
        v = np.zeros(2**w)
        for k, c in self.counts.items():
            if len(k) != w:
                raise ValueError(f"bitstring {k!r} does not have width {w}")
            v[int(k, 2)] += c
        return v / self.shots

    def marginal(self, bits: Sequence[int]) -> "CountsDistribution":
        """Keep classical bits ``bits`` (bits[0] becomes the new bit 0)."""
        out: dict[str, int] = {}
        w = self.width
        for k, c in self.counts.items():
            key = "".join(k[w - 1 - b] for b in reversed(bits))
            out[key] = out.get(key, 0) + c
        return CountsDistribution(out, self.shots)

    def to_dict(self) -> dict:
        return {"shots": self.shots, "counts": dict(self.counts)}

    @classmethod
    def from_dict(cls, d: dict) -> "CountsDistribution":
        return cls(d["counts"], d["shots"])

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


@dataclass(frozen=True)
class Observable:
    """Diagonal observable: expectation = sum_b weight(b) P(b)."""

    weights: Mapping[str, float]

    def __post_init__(self):
        w = {str(k): float(v) for k, v in self.weights.items()}
        if not w or not any(v != 0 for v in w.values()):
            raise ValueError("observable needs at least one nonzero weight")
        if not all(np.isfinite(list(w.values()))):
            raise ValueError("observable weights must be finite")
        object.__setattr__(self, "weights", w)

    @classmethod
    def indicator(cls, *states: str) -> "Observable":
        return cls({s: 1.0 for s in states})


def expectation(counts: CountsDistribution, obs: Observable) -> float:
    if not counts.shots:
        raise ValueError("empty counts")
    return sum(obs.weights.get(k, 0.0) * c for k, c in counts.counts.items()) / counts.shots


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def apply_readout(probs: np.ndarray, readout: Mapping[int, np.ndarray], bits: Sequence[int] | None = None) -> np.ndarray:
    """Push a distribution over ``len(bits)`` bits through per-bit confusion.

    ``bits[i]`` names the qubit whose readout matrix applies to bit i.
    """
    w = int(np.log2(probs.size))
    bits = list(range(w)) if bits is None else list(bits)
    t = probs.reshape([2] * w)
    for i, q in enumerate(bits):
        r = readout.get(q)
        if r is None:
            continue
        ax = w - 1 - i
        t = np.moveaxis(np.tensordot(np.asarray(r).T, t, axes=([1], [ax])), 0, ax)
    return t.reshape(-1)


def sample_probabilities(probs: np.ndarray, shots: int, rng: np.random.Generator, width: int) -> CountsDistribution:
    p = np.clip(np.asarray(probs, dtype=float), 0, None)
    p = p / p.sum()
    hits = rng.multinomial(shots, p)
    return CountsDistribution({bitstring(i, width): int(c) for i, c in enumerate(hits) if c}, shots)


def sample_counts(
    state: StateVector | DensityMatrix,
    shots: int,
    readout: Mapping[int, np.ndarray] | None = None,
    seed: int | None = 0,
) -> CountsDistribution:
    """Multinomial draw from Born probabilities, then per-qubit readout flips.

    Readout flips are independent per shot, so drawing from the confused
    distribution is the same law as flipping bits shot by shot.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    probs = state.probabilities()
    if readout:
        probs = apply_readout(probs, readout)
    return sample_probabilities(probs, shots, _rng(seed), state.n)


# -- measuring executor -----------------------------------------------------

def _components(circuit: Circuit) -> list[list[int]]:
    parent = list(range(circuit.num_qubits))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for g in circuit.gates:
        for q in g.qubits[1:]:
            ra, rb = find(g.qubits[0]), find(q)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    groups: dict[int, list[int]] = {}
    for q in range(circuit.num_qubits):
        groups.setdefault(find(q), []).append(q)
    return [sorted(g) for g in groups.values()]


def _component_probabilities(circuit: Circuit, qubits: list[int], noise: NoiseModel | None, scale: float) -> np.ndarray:
    local = {q: i for i, q in enumerate(qubits)}
    sub = Circuit(len(qubits), [g.remap(local) for g in circuit.gates if g.qubits[0] in local])
    if noise is None or (noise.p1 == 0 and noise.p2 == 0):
        return simulate_statevector(sub).probabilities()
    if len(qubits) > MAX_DENSITY_QUBITS:
        raise ValueError(f"noisy group of {len(qubits)} qubits exceeds density cap")
    return simulate_density(sub, noise, scale).probabilities()


def measured_distribution(circuit: Circuit, noise: NoiseModel | None = None, scale: float = 1.0) -> list[tuple[list[int], np.ndarray]]:
    """Exact outcome law of a measured circuit, factorized over independent qubit groups.

    Returns ``[(clbits, probs)]``; ``probs`` is over the group's classical bits
    (clbits[0] is the least significant) with readout confusion applied.
    """
    unitary = circuit.unitary_part()
    meas = circuit.measurements()
    if not meas:
        raise ValueError("circuit has no measurements")
    out = []
    for qubits in _components(unitary):
        clbits = sorted(c for c, q in meas.items() if q in qubits)
        if not clbits:
            continue
        probs = _component_probabilities(unitary, qubits, noise, scale)
        # marginalize onto measured qubits, ordered by clbit
        mq = [meas[c] for c in clbits]
        t = probs.reshape([2] * len(qubits))
        axes_keep = [len(qubits) - 1 - qubits.index(q) for q in reversed(mq)]
        drop = tuple(a for a in range(len(qubits)) if a not in axes_keep)
        t = t.sum(axis=drop) if drop else t
        kept_sorted = sorted(axes_keep)
        t = np.transpose(t, [kept_sorted.index(a) for a in axes_keep])
        marg = t.reshape(-1)
        if noise is not None and noise.readout:
            marg = apply_readout(marg, noise.readout, mq)
        out.append((clbits, marg))
    return out


def execute(circuit: Circuit, shots: int, seed: int | None = 0, noise: NoiseModel | None = None, scale: float = 1.0) -> CountsDistribution:
    """Run a measured circuit and return counts over its classical bits.

    Qubit groups that never interact are simulated separately and sampled
    from independent, seed-derived streams; with no inter-group noise this is
    the exact joint law, and it keeps chip-wide merged circuits tractable.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    parts = measured_distribution(circuit, noise, scale)
    width = circuit.num_clbits
    streams = np.random.SeedSequence(seed).spawn(len(parts))
    if len(parts) == 1 and len(parts[0][0]) == width and parts[0][0] == list(range(width)):
        return sample_probabilities(parts[0][1], shots, _rng(streams[0]), width)
    if width > 62:
        raise ValueError("more than 62 classical bits is not supported")
    codes = np.zeros(shots, dtype=np.int64)
    for (clbits, probs), ss in zip(parts, streams):
        p = np.clip(probs, 0, None)
        draws = _rng(ss).choice(p.size, size=shots, p=p / p.sum())
        for i, c in enumerate(clbits):
            codes |= ((draws >> i) & 1).astype(np.int64) << c
    values, hits = np.unique(codes, return_counts=True)
    return CountsDistribution({bitstring(int(v), width): int(c) for v, c in zip(values, hits)}, shots)
