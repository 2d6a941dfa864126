"""Chip connectivity and error data."""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from importlib import resources
from pathlib import Path

import numpy as np

from ..qcore import NoiseModel


@dataclass(frozen=True)
class ChipModel:
    """Coupling graph plus error rates.

    ``edges`` are (control, target) pairs. On a symmetric chip each edge is
    usable in both directions; otherwise only as listed. ``gate_errors`` keys
    look like ``"cx:0,1"`` or ``"sx:3"``.
    """

    num_qubits: int
    edges: tuple = ()
    symmetric: bool = True
    gate_errors: dict = field(default_factory=dict)
    readout_errors: tuple = ()
    name: str = ""

    def __post_init__(self):
        if self.num_qubits < 1:
            raise ValueError("chip needs at least one qubit")
        edges = tuple((int(a), int(b)) for a, b in self.edges)
        for a, b in edges:
            if a == b:
                raise ValueError(f"self-loop on qubit {a}")
            if not (0 <= a < self.num_qubits and 0 <= b < self.num_qubits):
                raise ValueError(f"edge ({a},{b}) references a missing qubit")
        errs = {str(k): float(v) for k, v in self.gate_errors.items()}
        ro = tuple(float(v) for v in self.readout_errors)
        if any(not 0 <= v <= 1 for v in list(errs.values()) + list(ro)):
            raise ValueError("error rates must lie in [0, 1]")
        if ro and len(ro) != self.num_qubits:
            raise ValueError("one readout error per qubit")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "gate_errors", errs)
        object.__setattr__(self, "readout_errors", ro)

    # -- graph ------------------------------------------------------------

    @cached_property
    def _directed(self) -> frozenset:
        return frozenset(self.edges) | (frozenset((b, a) for a, b in self.edges) if self.symmetric else frozenset())

    @cached_property
    def adjacency(self) -> tuple:
        adj = [set() for _ in range(self.num_qubits)]
        for a, b in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        return tuple(tuple(sorted(s)) for s in adj)

    def native(self, c: int, t: int) -> bool:
        """CX(c, t) runs without a direction flip."""
        return (c, t) in self._directed

    def coupled(self, a: int, b: int) -> bool:
        return b in self.adjacency[a]

    @cached_property
    def distances(self) -> np.ndarray:
        n = self.num_qubits
        d = np.full((n, n), -1, dtype=int)
        for s in range(n):
            d[s, s] = 0
            queue = deque([s])
            while queue:
                u = queue.popleft()
                for v in self.adjacency[u]:
                    if d[s, v] < 0:
                        d[s, v] = d[s, u] + 1
                        queue.append(v)
        return d

    def shortest_path(self, a: int, b: int) -> list[int]:
        """BFS path a..b, neighbours visited in index order (deterministic)."""
        prev = {a: None}
        queue = deque([a])
        while queue:
            u = queue.popleft()
            if u == b:
                break
            for v in self.adjacency[u]:
                if v not in prev:
                    prev[v] = u
                    queue.append(v)
        if b not in prev:
            raise ValueError(f"qubits {a} and {b} are not connected")
        path = [b]
        while path[-1] != a:
            path.append(prev[path[-1]])
        return path[::-1]

    # -- errors -----------------------------------------------------------

    def one_qubit_error(self, q: int) -> float:
        return self.gate_errors.get(f"sx:{q}", 0.0)

    def cx_error(self, a: int, b: int) -> float:
        e = self.gate_errors.get(f"cx:{a},{b}")
        if e is None:
            e = self.gate_errors.get(f"cx:{b},{a}", 0.0)
        return e

    @cached_property
    def worst_cx_error(self) -> float:
        vals = [v for k, v in self.gate_errors.items() if k.startswith("cx:")]
        return max(vals) if vals else 0.0

    def readout_error(self, q: int) -> float:
        return self.readout_errors[q] if self.readout_errors else 0.0

    def noise_model(self, qubits=None, p1=None, p2=None) -> NoiseModel:
        """Uniform depolarizing model (mean chip rates unless given) plus symmetric readout."""
        qubits = range(self.num_qubits) if qubits is None else qubits
        sx = [v for k, v in self.gate_errors.items() if k.startswith("sx:")]
        p1 = float(np.mean(sx)) if p1 is None and sx else (p1 or 0.0)
        cx = [v for k, v in self.gate_errors.items() if k.startswith("cx:")]
        p2 = float(np.mean(cx)) if p2 is None and cx else (p2 or 0.0)
        ro = {}
        for q in qubits:
            f = self.readout_error(q)
            if f:
                ro[q] = [[1 - f, f], [f, 1 - f]]
        return NoiseModel(p1, p2, ro)

    # -- io ---------------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "num_qubits": self.num_qubits,
            "symmetric": self.symmetric,
            "edges": [list(e) for e in self.edges],
            "gate_errors": dict(sorted(self.gate_errors.items())),
            "readout_errors": list(self.readout_errors),
        }

    @classmethod
    def from_dict(cls, d: dict, name: str = "") -> "ChipModel":
        missing = {"num_qubits", "edges"} - set(d)
        if missing:
            raise ValueError(f"chip description lacks {sorted(missing)}")
        return cls(d["num_qubits"], d["edges"], d.get("symmetric", True), d.get("gate_errors", {}), d.get("readout_errors", ()), name)

    @classmethod
    def load(cls, path) -> "ChipModel":
        p = Path(path)
        return cls.from_dict(json.loads(p.read_text()), p.stem)

    def __hash__(self):
        return hash((self.num_qubits, self.edges, self.symmetric))


def load_chip(name: str) -> ChipModel:
    """A shipped chip by name ("nairobi", "osaka") or a path to a chip JSON file."""
    if Path(name).suffix == ".json" or "/" in name:
        return ChipModel.load(name)
    res = resources.files("qtunnel.transpile") / "chips" / f"{name}.json"
    if not res.is_file():
        raise ValueError(f"unknown chip {name!r}")
    return ChipModel.from_dict(json.loads(res.read_text()), name)


def line_chip(n: int, cx_errors=None) -> ChipModel:
    edges = [(i, i + 1) for i in range(n - 1)]
    errs = {}
    for (a, b), e in zip(edges, cx_errors or [0.01] * len(edges)):
        errs[f"cx:{a},{b}"] = e
        errs[f"cx:{b},{a}"] = e
    return ChipModel(n, edges, True, errs, name=f"line{n}")
