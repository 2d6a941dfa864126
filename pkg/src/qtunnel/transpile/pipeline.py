"""decompose -> layout -> route -> translate -> optimize, with a per-pass report."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ..qcore import Circuit
from ..qcore.statevector import _check_unitary_circuit, apply_gate
from .chip import ChipModel
from .passes import BasisSet, Layout, choose_layout, decompose, optimize, route, translate


@dataclass(frozen=True)
class TranspileOptions:
    layout: str = "scored"  # or "trivial"
    k: int = 1000
    initial_layout: tuple | None = None
    basis: BasisSet = field(default_factory=BasisSet)
    pre_optimize: bool = True
    optimize: bool = True


@dataclass
class TranspileResult:
    circuit: Circuit
    layout: Layout  # virtual -> physical at the start
    final_layout: Layout  # virtual -> physical at the end (after routing swaps)
    report: dict

    def to_dict(self) -> dict:
        return {
            "circuit": self.circuit.to_dict(),
            "layout": self.layout.to_dict(),
            "final_layout": self.final_layout.to_dict(),
            "report": self.report,
        }


def circuit_stats(c: Circuit) -> dict:
    ops = [g for g in c.gates if g.name != "MEASURE"]
    return {"gates": len(ops), "two_qubit": sum(g.arity == 2 for g in ops), "depth": Circuit(c.num_qubits, ops).depth()}


def transpile_pipeline(circuit: Circuit, chip: ChipModel, options: TranspileOptions | None = None) -> TranspileResult:
    opt = options or TranspileOptions()
    passes = []
    prev = circuit_stats(circuit)

    def record(name, c):
        nonlocal prev
        s = circuit_stats(c)
        passes.append({"pass": name, **s, "delta_gates": s["gates"] - prev["gates"], "delta_depth": s["depth"] - prev["depth"]})
        prev = s

    c = decompose(circuit)
    record("decompose", c)
    if opt.pre_optimize:
        c = optimize(c, resynthesize=False)
        record("pre_optimize", c)
    if opt.initial_layout is not None:
        layout = Layout(tuple(opt.initial_layout))
    else:
        layout = choose_layout(c, chip, opt.layout, opt.k)
    routed, final = route(c, layout, chip)
    record("route", routed)
    c = translate(routed, opt.basis, chip)
    record("translate", c)
    if opt.optimize:
        c = optimize(c)
        record("optimize", c)
    report = {
        "chip": chip.name,
        "input": circuit_stats(circuit),
        "output": circuit_stats(c),
        "passes": passes,
        "swaps": sum(g.name == "SWAP" for g in routed.gates),
        "layout": list(layout.mapping),
        "final_layout": list(final.mapping),
    }
    return TranspileResult(c, layout, final, report)


def adheres(circuit: Circuit, chip: ChipModel) -> bool:
    """Every two-qubit gate sits on an edge, in a native direction for CX on directed chips."""
    for g in circuit.gates:
        if g.arity != 2:
            continue
        a, b = g.qubits
        if g.name == "CX" and not chip.native(a, b):
            return False
        if not chip.coupled(a, b):
            return False
    return True


def equivalence_distance(original: Circuit, compiled: Circuit, layout, final_layout) -> float:
    """max |U_c E_in - e^{ig} E_out U| over all virtual basis inputs.

    E_in places virtual qubit i on physical ``layout[i]``; E_out places it on
    ``final_layout[i]``. Unused physical qubits start and must end in |0>.
    """
    orig = original.unitary_part()
    comp = compiled.unitary_part()
    _check_unitary_circuit(orig)
    n = orig.num_qubits
    layout, final_layout = list(layout), list(final_layout)
    used = sorted(set(layout) | set(final_layout) | set(comp.active_qubits()))
    local = {p: i for i, p in enumerate(used)}
    m = len(used)
    if m > 14:
        raise ValueError("too many active qubits for a dense equivalence check")
    small = Circuit(m, [g.remap(local) for g in comp.gates])
    N = 2**n

    def embed(placement):
        idx = np.zeros(N, dtype=np.int64)
        for i in range(n):
            idx |= ((np.arange(N) >> i) & 1) << local[placement[i]]
        return idx

    cols = np.zeros((2**m, N), dtype=complex)
    cols[embed(layout), np.arange(N)] = 1
    for g in small.gates:
        cols = apply_gate(cols, g, m)
    u = np.eye(N, dtype=complex)
    for g in orig.gates:
        u = apply_gate(u, g, n)
    expected = np.zeros((2**m, N), dtype=complex)
    expected[embed(final_layout), :] = u
    i = np.unravel_index(np.argmax(np.abs(expected)), expected.shape)
    ph = cols[i] / expected[i]
    ph = ph / abs(ph) if abs(ph) > 0 else 1.0
    return float(np.max(np.abs(cols - ph * expected)))


def depth_comparison(circuit: Circuit, chips: dict) -> str:
    """JSON table of output depth and two-qubit count per chip."""
    rows = {}
    for name, chip in chips.items():
        r = transpile_pipeline(circuit, chip)
        rows[name] = r.report["output"]
    return json.dumps(rows, sort_keys=True)
