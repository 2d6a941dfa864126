from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .gates import Gate


@dataclass(frozen=True)
class Circuit:
    """Ordered gate list over virtual qubits; immutable once built.

    Measurement is terminal: no gate may touch a qubit after it is measured,
    and each classical bit is written at most once.
    """

    num_qubits: int
    gates: tuple[Gate, ...] = ()
    num_clbits: int = 0
    metadata: Mapping = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        object.__setattr__(self, "metadata", dict(self.metadata))
        if self.num_qubits < 1:
            raise ValueError("num_qubits must be positive")
        if self.num_clbits < 0:
            raise ValueError("num_clbits must be non-negative")
        measured: set[int] = set()
        written: set[int] = set()
        for g in self.gates:
            if max(g.qubits) >= self.num_qubits:
                raise ValueError(f"{g.name} on qubit {max(g.qubits)} outside {self.num_qubits}-qubit circuit")
            if measured.intersection(g.qubits):
                raise ValueError(f"{g.name} follows a measurement on the same qubit")
            if g.name == "MEASURE":
                c = g.clbits[0]
                if c >= self.num_clbits or c in written:
                    raise ValueError(f"MEASURE targets invalid or reused classical bit {c}")
                written.add(c)
                measured.add(g.qubits[0])

    def __len__(self) -> int:
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def __add__(self, other: "Circuit") -> "Circuit":
        n = max(self.num_qubits, other.num_qubits)
        return Circuit(n, self.gates + other.gates, max(self.num_clbits, other.num_clbits), self.metadata)

    def append(self, gates: Iterable[Gate]) -> "Circuit":
        return self.replace(gates=self.gates + tuple(gates))

    def replace(self, **kw) -> "Circuit":
        d = dict(num_qubits=self.num_qubits, gates=self.gates, num_clbits=self.num_clbits, metadata=self.metadata)
        d.update(kw)
        return Circuit(**d)

    def remap(self, mapping: Mapping[int, int], num_qubits: int) -> "Circuit":
        return self.replace(num_qubits=num_qubits, gates=[g.remap(mapping) for g in self.gates])

    @property
    def has_measurements(self) -> bool:
        return any(g.name == "MEASURE" for g in self.gates)

    def unitary_part(self) -> "Circuit":
        return self.replace(gates=[g for g in self.gates if g.name != "MEASURE"], num_clbits=0)

    def measurements(self) -> dict[int, int]:
        """clbit -> qubit."""
        return {g.clbits[0]: g.qubits[0] for g in self.gates if g.name == "MEASURE"}

    def measure_all(self, qubits: Iterable[int] | None = None) -> "Circuit":
        qubits = list(range(self.num_qubits)) if qubits is None else list(qubits)
        from .gates import measure

        return self.replace(
            gates=self.gates + tuple(measure(q, i) for i, q in enumerate(qubits)),
            num_clbits=len(qubits),
        )

    def active_qubits(self) -> set[int]:
        return {q for g in self.gates for q in g.qubits}

    def count_ops(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for g in self.gates:
            out[g.name] = out.get(g.name, 0) + 1
        return out

    def two_qubit_count(self) -> int:
        return sum(1 for g in self.gates if g.arity == 2 and g.name != "MEASURE")

    def depth(self) -> int:
        level = [0] * self.num_qubits
        for g in self.gates:
            d = max(level[q] for q in g.qubits) + 1
            for q in g.qubits:
                level[q] = d
        return max(level, default=0)

    # -- JSON --------------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "num_qubits": self.num_qubits,
            "num_clbits": self.num_clbits,
            "gates": [g.to_dict() for g in self.gates],
            "metadata": dict(self.metadata),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Circuit":
        return cls(
            d["num_qubits"],
            tuple(Gate.from_dict(g) for g in d["gates"]),
            d.get("num_clbits", 0),
            d.get("metadata", {}),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, s: str) -> "Circuit":
        return cls.from_dict(json.loads(s))
