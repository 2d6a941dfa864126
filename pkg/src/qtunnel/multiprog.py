"""Run several independent circuits side by side on one chip.

Regions are grown greedily and kept at least ``buffer`` graph steps apart,
so buffer=2 leaves at least one idle qubit between any two regions.
"""

from __future__ import annotations

import itertools
import json
from collections import deque
from dataclasses import dataclass, field

from .qcore import Circuit, CountsDistribution
from .qcore.gates import measure
from .transpile.chip import ChipModel


@dataclass(frozen=True)
class Assignment:
    circuit: int
    physical: tuple  # region, in placement order
    map: dict  # virtual -> physical
    clbits: tuple = ()  # positions of this circuit's classical bits in the merged register

    def to_dict(self) -> dict:
        return {"circuit": self.circuit, "physical": list(self.physical),
                "map": {str(v): p for v, p in sorted(self.map.items())}, "clbits": list(self.clbits)}


@dataclass(frozen=True)
class UtilizationReport:
    qubits_used: int
    chip_size: int
    circuits: int

    @property
    def utilization(self) -> float:
        return self.qubits_used / self.chip_size

    def to_dict(self) -> dict:
        return {"qubits_used": self.qubits_used, "chip_size": self.chip_size,
                "utilization": self.utilization, "circuits": self.circuits}

    def __str__(self) -> str:
        return f"{self.circuits} circuits on {self.qubits_used}/{self.chip_size} qubits ({100 * self.utilization:.2f}%)"


@dataclass(frozen=True)
class PackingPlan:
    assignments: tuple  # ordered by circuit index
    buffer: int
    chip: ChipModel = field(repr=False, compare=False, default=None)

    @property
    def num_clbits(self) -> int:
        return sum(len(a.clbits) for a in self.assignments)

    def utilization(self) -> UtilizationReport:
        used = sum(len(a.physical) for a in self.assignments)
        return UtilizationReport(used, self.chip.num_qubits, len(self.assignments))

    def to_dict(self) -> dict:
        return {"buffer": self.buffer, "assignments": [a.to_dict() for a in self.assignments]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def region_distance(chip: ChipModel, a, b) -> int:
    d = chip.distances
    return min(int(d[p, q]) if d[p, q] >= 0 else 10**9 for p in a for q in b)


def check_plan(plan: PackingPlan) -> None:
    """Recompute every invariant; raise on the first violation."""
    chip = plan.chip
    seen: set[int] = set()
    for a in plan.assignments:
        region = set(a.physical)
        if region & seen:
            raise ValueError(f"region of circuit {a.circuit} overlaps another")
        seen |= region
        if set(a.map.values()) != region:
            raise ValueError(f"map of circuit {a.circuit} does not cover its region")
        # connectivity of the region
        start = a.physical[0]
        reach, queue = {start}, deque([start])
        while queue:
            u = queue.popleft()
            for v in chip.adjacency[u]:
                if v in region and v not in reach:
                    reach.add(v)
                    queue.append(v)
        if reach != region:
            raise ValueError(f"region of circuit {a.circuit} is not connected")
    for i, a in enumerate(plan.assignments):
        for b in plan.assignments[i + 1:]:
            if region_distance(chip, a.physical, b.physical) < plan.buffer:
                raise ValueError(f"circuits {a.circuit} and {b.circuit} closer than buffer {plan.buffer}")


def _grow(chip: ChipModel, start: int, size: int, eligible: set) -> list[int] | None:
    order, seen, queue = [start], {start}, deque([start])
    while queue and len(order) < size:
        u = queue.popleft()
        for v in chip.adjacency[u]:
            if v in eligible and v not in seen:
                seen.add(v)
                order.append(v)
                queue.append(v)
                if len(order) == size:
                    break
    return order if len(order) == size else None


MAX_ORIENTATIONS = 5040


def _orient(chip: ChipModel, circuit: Circuit, region: list[int]) -> list[int]:
    """Ordering of ``region`` (virtual i -> entry i) that puts the circuit's two-qubit gates on native edges.

    Already-compiled circuits keep their hardware adherence this way. The
    first ordering with the fewest off-graph then fewest reversed gates wins;
    BFS order is tried first, so circuits without two-qubit gates keep it.
    """
    pairs = {tuple(g.qubits) for g in circuit.gates if g.arity == 2}
    if not pairs:
        return region
    best = None
    for perm in itertools.islice(itertools.permutations(region), MAX_ORIENTATIONS):
        off = sum(not chip.coupled(perm[a], perm[b]) for a, b in pairs)
        rev = sum(not chip.native(perm[a], perm[b]) for a, b in pairs)
        if best is None or (off, rev) < best[0]:
            best = ((off, rev), list(perm))
            if best[0] == (0, 0):
                break
    return best[1]


def pack(circuits, chip: ChipModel, buffer: int = 2) -> PackingPlan:
    """Widest circuits first; each region is BFS-grown from the lowest usable free qubit.

    Within a region the virtual->physical order follows the circuit's own
    two-qubit gates when they fit the chip's native directions.
    """
    if buffer < 1:
        raise ValueError("buffer must be >= 1")
    circuits = list(circuits)
    if not circuits:
        raise ValueError("nothing to pack")
    order = sorted(range(len(circuits)), key=lambda i: (-circuits[i].num_qubits, i))
    dist = chip.distances
    regions: dict[int, list[int]] = {}
    blocked: set[int] = set()  # qubits within buffer - 1 of an allocated region
    for i in order:
        width = circuits[i].num_qubits
        eligible = {q for q in range(chip.num_qubits) if q not in blocked}
        region = None
        for start in sorted(eligible):
            region = _grow(chip, start, width, eligible)
            if region:
                break
        if region is None:
            raise ValueError(f"cannot place circuit {i} (width {width}) on {chip.name or 'chip'} with buffer {buffer}")
        regions[i] = _orient(chip, circuits[i], region)
        for p in region:
            blocked |= {q for q in range(chip.num_qubits) if 0 <= dist[p, q] < buffer}
    assignments = []
    offset = 0
    for i, c in enumerate(circuits):
        assignments.append(Assignment(i, tuple(regions[i]), {v: regions[i][v] for v in range(c.num_qubits)},
                                      tuple(range(offset, offset + c.num_clbits))))
        offset += c.num_clbits
    plan = PackingPlan(tuple(assignments), buffer, chip)
    check_plan(plan)
    return plan


def merge(circuits, plan: PackingPlan) -> Circuit:
    """One chip-wide circuit; clbits of circuit i occupy plan.assignments[i].clbits."""
    circuits = list(circuits)
    if len(circuits) != len(plan.assignments):
        raise ValueError("plan and circuit list differ in length")
    gates = []
    for c, a in zip(circuits, plan.assignments):
        if c.num_qubits != len(a.map) or c.num_clbits != len(a.clbits):
            raise ValueError(f"circuit {a.circuit} does not match its assignment")
        for g in c.unitary_part().gates:
            gates.append(g.remap(a.map))
    # measurements last, so no merged gate follows a measurement
    for c, a in zip(circuits, plan.assignments):
        for g in c.gates:
            if g.name == "MEASURE":
                gates.append(measure(a.map[g.qubits[0]], a.clbits[g.clbits[0]]))
    return Circuit(plan.chip.num_qubits, gates, num_clbits=plan.num_clbits, metadata={"label": "multiprogram"})


def split_counts(counts: CountsDistribution, plan: PackingPlan) -> list[CountsDistribution]:
    if counts.width != plan.num_clbits:
        raise ValueError(f"counts have {counts.width} bits, plan expects {plan.num_clbits}")
    return [counts.marginal(list(a.clbits)) for a in plan.assignments]


def localize(circuit: Circuit, assignment: Assignment) -> Circuit:
    """Inverse of the plan map: a physical circuit confined to the region -> its virtual circuit."""
    inv = {p: v for v, p in assignment.map.items()}
    stray = circuit.active_qubits() - set(inv)
    if stray:
        raise ValueError(f"circuit touches qubits {sorted(stray)} outside its region")
    return circuit.remap(inv, len(inv))
