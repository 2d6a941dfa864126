"""Compiler passes: decompose, layout, route, translate, optimize.

Every pass is a pure function Circuit -> Circuit (route also returns the
final placement). Unitaries are preserved up to global phase.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from ..qcore import Circuit
from ..qcore import gates as G
from ..qcore.gates import Gate
from .chip import ChipModel

TWO_PI = 2 * math.pi
ANGLE_TOL = 1e-12


# -- decompose --------------------------------------------------------------

def walsh_coefficients(phases) -> np.ndarray:
    """a_S with phi(x) = sum_S a_S (-1)^{popcount(S & x)}."""
    phi = np.asarray(phases, dtype=float)
    N = phi.size
    x = np.arange(N)
    signs = np.array([[(-1) ** bin(s & xi).count("1") for xi in x] for s in range(N)])
    return signs @ phi / N


def diag_network(phases, qubits) -> list[Gate]:
    """Parity network for diag(e^{i phases}) on ``qubits``, global phase dropped."""
    qubits = list(qubits)
    a = walsh_coefficients(phases)
    out: list[Gate] = []
    for s in range(1, a.size):
        if abs(a[s]) < 1e-15:
            continue
        members = [qubits[i] for i in range(len(qubits)) if (s >> i) & 1]
        ladder = [G.cx(members[i], members[i + 1]) for i in range(len(members) - 1)]
        # exp(i a Z_S) = RZ(-2a) on the parity qubit
        out += ladder + [G.rz(-2 * a[s], members[-1])] + ladder[::-1]
    return out


def decompose(circuit: Circuit) -> Circuit:
    """Expand composite gates so only one- and two-qubit kinds remain."""
    from ..tunnel import qft_gates

    out: list[Gate] = []
    changed = False
    for g in circuit.gates:
        if g.name == "DIAG":
            out += diag_network(g.phases, g.qubits)
            changed = True
        elif g.name in ("QFT", "IQFT"):
            out += decompose(Circuit(circuit.num_qubits, qft_gates(list(g.qubits), g.name == "IQFT"))).gates
            changed = True
        elif g.arity > 2:
            raise ValueError(f"cannot decompose {g.name}")
        else:
            out.append(g)
    return circuit.replace(gates=tuple(out)) if changed else circuit


# -- layout -----------------------------------------------------------------

@dataclass(frozen=True)
class Layout:
    mapping: tuple  # virtual i -> physical mapping[i]
    score: float = 0.0

    def __post_init__(self):
        m = tuple(int(p) for p in self.mapping)
        if len(set(m)) != len(m) or any(p < 0 for p in m):
            raise ValueError("layout must be injective onto non-negative indices")
        object.__setattr__(self, "mapping", m)

    def __getitem__(self, v):
        return self.mapping[v]

    def __len__(self):
        return len(self.mapping)

    def to_dict(self) -> dict:
        return {"mapping": list(self.mapping), "score": self.score}


@dataclass
class _Profile:
    one: np.ndarray
    meas: np.ndarray
    two: dict = field(default_factory=dict)


def _profile(circuit: Circuit) -> _Profile:
    n = circuit.num_qubits
    prof = _Profile(np.zeros(n), np.zeros(n))
    for g in circuit.gates:
        if g.name == "MEASURE":
            prof.meas[g.qubits[0]] += 1
        elif g.arity == 1:
            prof.one[g.qubits[0]] += 1
        else:
            key = tuple(sorted(g.qubits))
            prof.two[key] = prof.two.get(key, 0) + 1
    return prof


def layout_score(circuit: Circuit, mapping, chip: ChipModel, profile: _Profile | None = None) -> float:
    """Summed error rates of the mapped gates; 2-qubit gates off the graph cost 3x the worst CX."""
    prof = profile or _profile(circuit)
    penalty = 3 * chip.worst_cx_error
    s = 0.0
    for v, c in enumerate(prof.one):
        if c:
            s += c * chip.one_qubit_error(mapping[v])
    for v, c in enumerate(prof.meas):
        if c:
            s += c * chip.readout_error(mapping[v])
    for (u, v), c in prof.two.items():
        a, b = mapping[u], mapping[v]
        s += c * (chip.cx_error(a, b) if chip.coupled(a, b) else penalty)
    return float(s)


def connected_subsets(chip: ChipModel, size: int, root: int) -> list[tuple]:
    """All connected vertex sets of ``size`` whose smallest member is ``root``, sorted.

    ESU enumeration: each set is reached exactly once by only extending with
    the exclusive neighbourhood of the newly added vertex.
    """
    adj = chip.adjacency
    found: list[tuple] = []

    def extend(sub: set, near: set, ext: set):
        if len(sub) == size:
            found.append(tuple(sorted(sub)))
            return
        ext = set(ext)
        while ext:
            w = min(ext)
            ext.discard(w)
            excl = {u for u in adj[w] if u > root and u not in sub and u not in near}
            extend(sub | {w}, near | set(adj[w]), ext | excl)

    start = {u for u in adj[root] if u > root}
    extend({root}, set(adj[root]) | {root}, start)
    return sorted(found)


def candidate_mappings(chip: ChipModel, width: int, k: int):
    """Up to ``k`` placements on connected regions, lexicographic in the region then the permutation."""
    emitted = 0
    for root in range(chip.num_qubits):
        for region in connected_subsets(chip, width, root):
            for perm in itertools.permutations(region):
                yield perm
                emitted += 1
                if emitted >= k:
                    return


def choose_layout(circuit: Circuit, chip: ChipModel, strategy: str = "scored", k: int = 1000) -> Layout:
    n = circuit.num_qubits
    if n > chip.num_qubits:
        raise ValueError(f"circuit needs {n} qubits, chip has {chip.num_qubits}")
    if strategy == "trivial":
        mapping = tuple(range(n))
        return Layout(mapping, layout_score(circuit, mapping, chip))
    if strategy != "scored":
        raise ValueError(f"unknown layout strategy {strategy!r}")
    prof = _profile(circuit)
    best = None
    for mapping in candidate_mappings(chip, n, k):
        s = layout_score(circuit, mapping, chip, prof)
        if best is None or (s, mapping) < best:
            best = (s, mapping)
    if best is None:
        raise ValueError("no connected region of the required size on this chip")
    return Layout(best[1], best[0])


# -- route ------------------------------------------------------------------

def route(circuit: Circuit, layout: Layout, chip: ChipModel) -> tuple[Circuit, Layout]:
    """Greedy swap insertion along BFS shortest paths; returns the physical circuit and final placement."""
    if len(layout) != circuit.num_qubits:
        raise ValueError("layout size must match circuit width")
    if any(p >= chip.num_qubits for p in layout.mapping):
        raise ValueError("layout uses qubits missing from the chip")
    v2p = list(layout.mapping)
    p2v = {p: v for v, p in enumerate(v2p)}
    out: list[Gate] = []

    def swap(a, b):
        out.append(G.swap(a, b))
        va, vb = p2v.pop(a, None), p2v.pop(b, None)
        if va is not None:
            v2p[va] = b
            p2v[b] = va
        if vb is not None:
            v2p[vb] = a
            p2v[a] = vb

    for g in circuit.gates:
        if g.arity > 2:
            raise ValueError(f"route needs a decomposed circuit, found {g.name}")
        if g.arity == 2:
            a, b = v2p[g.qubits[0]], v2p[g.qubits[1]]
            if not chip.coupled(a, b):
                path = chip.shortest_path(a, b)
                for i in range(len(path) - 2):
                    swap(path[i], path[i + 1])
        out.append(g.remap({v: v2p[v] for v in g.qubits}))
    meta = dict(circuit.metadata)
    routed = Circuit(chip.num_qubits, out, num_clbits=circuit.num_clbits, metadata=meta)
    return routed, Layout(tuple(v2p))


# -- translate --------------------------------------------------------------

@dataclass(frozen=True)
class BasisSet:
    gates: frozenset = frozenset({"RZ", "SX", "X", "CX"})

    def __post_init__(self):
        gs = frozenset(str(g).upper() for g in self.gates)
        if "ECR" in gs:
            # modelled as a CX up to single-qubit pre-rotations
            gs = (gs - {"ECR"}) | {"CX"}
        if not {"RZ", "SX", "CX"} <= gs:
            raise ValueError(f"basis {sorted(gs)} is not universal (needs RZ, SX and CX or ECR)")
        object.__setattr__(self, "gates", gs)


def _lower(g: Gate, basis: BasisSet, chip: ChipModel | None) -> list[Gate]:
    name = g.name
    if name in basis.gates and name != "CX" or name == "MEASURE":
        return [g]
    q = g.qubits
    if name == "X":
        return [G.sx(q[0]), G.sx(q[0])]
    if name == "SXDG":
        return [G.rz(math.pi, q[0]), G.sx(q[0]), G.rz(math.pi, q[0])]
    if name == "H":
        return [G.rz(math.pi / 2, q[0]), G.sx(q[0]), G.rz(math.pi / 2, q[0])]
    if name == "P":
        return [G.rz(g.params[0], q[0])]
    if name == "CX":
        c, t = q
        if chip is None or chip.native(c, t):
            return [g]
        if chip.native(t, c):
            flip = [G.h(c), G.h(t)]
            return [x for h in flip + [G.cx(t, c)] + flip for x in _lower(h, basis, chip)]
        raise ValueError(f"CX({c},{t}) is not on a chip edge; route first")
    if name == "CZ":
        a, b = q
        seq = [G.h(b), G.cx(a, b), G.h(b)]
    elif name == "CP":
        c, t = q
        th = g.params[0]
        seq = [G.p(th / 2, c), G.cx(c, t), G.p(-th / 2, t), G.cx(c, t), G.p(th / 2, t)]
    elif name == "SWAP":
        a, b = q
        if chip is not None and not chip.native(a, b):
            a, b = b, a
        seq = [G.cx(a, b), G.cx(b, a), G.cx(a, b)]
    else:
        raise ValueError(f"no translation for {name}")
    return [x for s in seq for x in _lower(s, basis, chip)]


def translate(circuit: Circuit, basis: BasisSet | None = None, chip: ChipModel | None = None) -> Circuit:
    """Rewrite into ``basis``; with a directed ``chip``, reversed CX are flipped with H conjugation."""
    basis = basis or BasisSet()
    circuit = decompose(circuit)
    out = [x for g in circuit.gates for x in _lower(g, basis, chip)]
    return circuit.replace(gates=tuple(out))


# -- optimize ---------------------------------------------------------------

_SELF_INVERSE = {"X", "H", "CX", "CZ", "SWAP"}
_SYMMETRIC = {"CZ", "CP", "SWAP"}
_MERGEABLE = {"RZ", "P", "CP"}
_SYNTH_KINDS = {"X", "SX", "SXDG", "RZ", "H", "P"}


def _wrap(theta: float) -> float:
    t = math.fmod(theta, TWO_PI)
    if t > math.pi:
        t -= TWO_PI
    elif t <= -math.pi:
        t += TWO_PI
    return t


def _is_zero_rotation(g: Gate) -> bool:
    return g.name in _MERGEABLE and abs(_wrap(g.params[0])) < ANGLE_TOL


def _same_support(a: Gate, b: Gate) -> bool:
    if a.name in _SYMMETRIC and a.name == b.name:
        return set(a.qubits) == set(b.qubits)
    return a.qubits == b.qubits


def _combine(a: Gate, b: Gate):
    """Replacement for the adjacent pair (a then b), or None if nothing applies."""
    if a.name == "MEASURE" or b.name == "MEASURE" or not _same_support(a, b):
        return None
    if a.name == b.name and a.name in _SELF_INVERSE:
        return []
    if {a.name, b.name} == {"SX", "SXDG"}:
        return []
    if a.name == b.name and a.name in ("SX", "SXDG"):
        return [G.x(a.qubits[0])]
    if a.name == b.name and a.name in _MERGEABLE:
        t = _wrap(a.params[0] + b.params[0])
        return [] if abs(t) < ANGLE_TOL else [Gate(a.name, a.qubits, (t,))]
    return None


def cancel_and_merge(gates) -> list[Gate]:
    out: list[Gate | None] = []
    stacks: dict[int, list[int]] = {}
    for g in gates:
        if _is_zero_rotation(g):
            continue
        tops = {stacks[q][-1] if stacks.get(q) else None for q in g.qubits}
        if len(tops) == 1 and None not in tops:
            j = tops.pop()
            rep = _combine(out[j], g)
            if rep is not None:
                if rep:
                    out[j] = rep[0]
                else:
                    out[j] = None
                    for q in g.qubits:
                        stacks[q].pop()
                continue
        out.append(g)
        for q in g.qubits:
            stacks.setdefault(q, []).append(len(out) - 1)
    return [g for g in out if g is not None]


def _zyz(u: np.ndarray):
    """(theta, phi, lam) with u = e^{i alpha} U3(theta, phi, lam)."""
    c, s = abs(u[0, 0]), abs(u[1, 0])
    theta = 2 * math.atan2(s, c)
    if s < 1e-12:
        alpha = np.angle(u[0, 0])
        return theta, 0.0, float(np.angle(u[1, 1]) - alpha)
    if c < 1e-12:
        alpha = np.angle(-u[0, 1])
        return theta, float(np.angle(u[1, 0]) - alpha), 0.0
    alpha = np.angle(u[0, 0])
    return theta, float(np.angle(u[1, 0]) - alpha), float(np.angle(-u[0, 1]) - alpha)


def synthesize_1q(u: np.ndarray, q: int) -> list[Gate]:
    """Shortest of RZ / X-RZ / RZ-SX-RZ / RZ-SX-RZ-SX-RZ realizing u up to global phase."""
    theta, phi, lam = _zyz(u)
    if abs(theta) < 1e-12:
        seq = [G.rz(_wrap(phi + lam), q)]
    elif abs(theta - math.pi) < 1e-12:
        seq = [G.x(q), G.rz(_wrap(phi - lam + math.pi), q)]
    elif abs(theta - math.pi / 2) < 1e-12:
        seq = [G.rz(_wrap(lam - math.pi / 2), q), G.sx(q), G.rz(_wrap(phi + math.pi / 2), q)]
    else:
        seq = [G.rz(_wrap(lam), q), G.sx(q), G.rz(_wrap(theta + math.pi), q), G.sx(q), G.rz(_wrap(phi + math.pi), q)]
    return [g for g in seq if not _is_zero_rotation(g)]


def consolidate_1q(gates) -> list[Gate]:
    """Resynthesize runs of single-qubit gates when that makes them shorter."""
    gates = list(gates)
    runs: dict[int, list[int]] = {}
    replace: dict[int, list[Gate]] = {}
    drop: set[int] = set()

    def flush(q):
        run = runs.pop(q, [])
        if len(run) < 2:
            return
        u = np.eye(2, dtype=complex)
        for i in run:
            u = G.gate_matrix(gates[i]) @ u
        new = synthesize_1q(u, q)
        if len(new) < len(run):
            replace[run[0]] = new
            drop.update(run[1:])

    for i, g in enumerate(gates):
        if g.arity == 1 and g.name in _SYNTH_KINDS:
            runs.setdefault(g.qubits[0], []).append(i)
        else:
            for q in g.qubits:
                flush(q)
    for q in list(runs):
        flush(q)
    out: list[Gate] = []
    for i, g in enumerate(gates):
        if i in replace:
            out += replace[i]
        elif i not in drop:
            out.append(g)
    return out


def optimize(circuit: Circuit, resynthesize: bool = True) -> Circuit:
    """Fixed point of cancellation, rotation merging and (optionally) 1q resynthesis.

    Never run this on a noise-folded circuit: it removes the G G^dagger pairs
    that folding inserts.
    """
    gates = list(circuit.gates)
    while True:
        new = cancel_and_merge(gates)
        if resynthesize:
            new = consolidate_1q(new)
        if new == gates:
            break
        gates = new
    return circuit.replace(gates=tuple(gates))
