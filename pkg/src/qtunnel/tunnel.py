"""Trotterized time evolution of a particle on a periodic 1-D grid.

Units are natural (hbar = m = 1). Position index k maps to x_k = k * L / 2^n.
The kinetic operator is diagonal in the momentum basis reached with the QFT;
momenta are centered (two's complement), so index k carries momentum
k~ * 2 pi / L with k~ = k for k < 2^(n-1) and k - 2^n otherwise.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .qcore import Circuit, StateVector, sample_counts, simulate_statevector
from .qcore import gates as G
from .qcore.gates import dft_matrix
from .qcore.statevector import circuit_unitary

MAX_ORACLE_QUBITS = 6


@dataclass(frozen=True)
class Discretization:
    n: int
    L: float = 8.0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one qubit")
        if not self.L > 0:
            raise ValueError("box length must be positive")

    @property
    def size(self) -> int:
        return 2**self.n

    @property
    def dl(self) -> float:
        return self.L / self.size

    @property
    def grid(self) -> np.ndarray:
        return np.arange(self.size) * self.dl


@dataclass(frozen=True)
class PotentialSpec:
    """Square potential of strength ``v`` on the basis states matching ``pattern``.

    Pattern characters read like state labels: the first character is qubit
    n-1, the last is qubit 0; 'x' matches either bit. ``form`` offers the two
    single-qubit shorthands (barrier on the lowest / highest qubit) and needs
    ``n`` to expand.
    """

    pattern: str = ""
    v: float = 1.0
    form: str = "pattern"
    n: int | None = None

    def __post_init__(self):
        if self.form not in ("pattern", "single_z_low", "single_z_high"):
            raise ValueError(f"unknown potential form {self.form!r}")
        if self.form != "pattern":
            if self.n is None:
                raise ValueError(f"form {self.form!r} needs n")
            pat = "x" * (self.n - 1) + "1" if self.form == "single_z_low" else "1" + "x" * (self.n - 1)
            object.__setattr__(self, "pattern", pat)
        if not self.pattern or set(self.pattern) - set("01x"):
            raise ValueError(f"bad potential pattern {self.pattern!r}")
        if self.n is not None and len(self.pattern) != self.n:
            raise ValueError("pattern length must equal n")

    def literals(self) -> dict[int, int]:
        """qubit -> required bit."""
        n = len(self.pattern)
        return {n - 1 - pos: int(c) for pos, c in enumerate(self.pattern) if c != "x"}

    def mask(self, n: int) -> np.ndarray:
        if len(self.pattern) != n:
            raise ValueError(f"pattern {self.pattern!r} does not fit {n} qubits")
        idx = np.arange(2**n)
        m = np.ones(2**n, dtype=bool)
        for q, b in self.literals().items():
            m &= ((idx >> q) & 1) == b
        return m

    def profile(self, n: int) -> np.ndarray:
        return self.v * self.mask(n).astype(float)


@dataclass(frozen=True)
class WavepacketSpec:
    kind: str = "basis"
    k: int = 0
    mu: float = 0.0
    sigma: float = 1.0
    p: float = 0.0

    def __post_init__(self):
        if self.kind not in ("basis", "gaussian"):
            raise ValueError(f"unknown wavepacket kind {self.kind!r}")
        if self.kind == "gaussian" and not self.sigma > 0:
            raise ValueError("gaussian width must be positive")

    @classmethod
    def basis(cls, k: int) -> "WavepacketSpec":
        return cls("basis", k=k)

    @classmethod
    def gaussian(cls, mu: float, sigma: float, p: float = 0.0) -> "WavepacketSpec":
        return cls("gaussian", mu=mu, sigma=sigma, p=p)


@dataclass(frozen=True)
class TrotterConfig:
    dt: float = 0.1
    steps: int = 1
    order: int = 1
    use_ancilla: bool = False

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.steps < 0:
            raise ValueError("steps must be non-negative")
        if self.order not in (1, 2):
            raise ValueError("Trotter order must be 1 or 2")


@dataclass(frozen=True)
class KineticParams:
    momentum_scale: float = 2 * np.pi / 8.0
    literal_angles: bool = False

    @classmethod
    def for_grid(cls, disc: Discretization, **kw) -> "KineticParams":
        return cls(2 * np.pi / disc.L, **kw)

    def momenta(self, n: int) -> np.ndarray:
        k = np.arange(2**n)
        return np.where(k < 2 ** (n - 1), k, k - 2**n) * self.momentum_scale

    def phi(self, dt: float) -> float:
        """Phase per unit of (integer momentum)^2: exp(i phi k~^2) == exp(-i k^2 dt / 2)."""
        return -dt * self.momentum_scale**2 / 2


@dataclass
class TimelineResult:
    probabilities: np.ndarray
    potential_profile: np.ndarray

    @property
    def timesteps(self) -> int:
        return self.probabilities.shape[0] - 1

    def to_csv(self) -> str:
        n = int(np.log2(self.probabilities.shape[1]))
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["timestep", "state", "probability"])
        for t, row in enumerate(self.probabilities):
            for k, pr in enumerate(row):
                w.writerow([t, format(k, f"0{n}b"), repr(float(pr))])
        return buf.getvalue()

    def potential_csv(self) -> str:
        n = int(np.log2(self.potential_profile.size))
        lines = ["state,potential"] + [f"{format(k, f'0{n}b')},{float(v)!r}" for k, v in enumerate(self.potential_profile)]
        return "\n".join(lines) + "\n"


# -- builders ---------------------------------------------------------------

def qft_gates(qubits: list[int], inverse: bool = False) -> list[G.Gate]:
    """Little-endian QFT |j> -> sum_k e^{2 pi i jk/N}|k>/sqrt(N) over ``qubits``."""
    n = len(qubits)
    out: list[G.Gate] = []
    for j in reversed(range(n)):
        out.append(G.h(qubits[j]))
        for k in reversed(range(j)):
            out.append(G.cp(np.pi / 2 ** (j - k), qubits[k], qubits[j]))
    for i in range(n // 2):
        out.append(G.swap(qubits[i], qubits[n - 1 - i]))
    if inverse:
        out = [G.inverse(g) for g in reversed(out)]
    return out


def build_qft(n: int, inverse: bool = False) -> Circuit:
    if n < 1:
        raise ValueError("QFT needs at least one qubit")
    return Circuit(n, qft_gates(list(range(n)), inverse), metadata={"label": "IQFT" if inverse else "QFT"})


def kinetic_phases(n: int, dt: float, params: KineticParams) -> np.ndarray:
    """Target diagonal phases -k~^2 dt / 2 over momentum indices."""
    return -params.momenta(n) ** 2 * dt / 2


def _kinetic_coefficients(n: int, dt: float, params: KineticParams):
    # k~ (integer) = sum_j c_j x_j, with the top bit carrying -2^(n-1)
    c = [2.0**j for j in range(n - 1)] + [-(2.0 ** (n - 1))]
    phi = params.phi(dt)
    single = [phi * cj * cj for cj in c]
    pair = {(i, j): 2 * phi * c[i] * c[j] for i in range(n) for j in range(i + 1, n)}
    return single, pair


def build_kinetic(n: int, dt: float, params: KineticParams, use_ancilla: bool = False, num_qubits: int | None = None) -> Circuit:
    """diag(exp(-i k~^2 dt / 2)) on qubits 0..n-1 (momentum basis).

    Without ancilla: P on each qubit and CP on each pair. With ancilla (qubit
    n): each pair term goes through the parity x_i xor x_j collected on the
    ancilla, which is uncomputed afterwards, using
    x_i x_j = (x_i + x_j - (x_i xor x_j)) / 2.
    """
    width = num_qubits if num_qubits is not None else n + (1 if use_ancilla else 0)
    if use_ancilla and width < n + 1:
        raise ValueError("ancilla kinetic operator needs n + 1 qubits")
    anc = n
    gates: list[G.Gate] = []
    if params.literal_angles:
        if not use_ancilla:
            raise ValueError("the literal construction uses the ancilla")
        # angles as literally listed; kept for comparison, not oracle-equal
        phi = params.phi(dt)
        gates += [G.p(phi / 2 ** (2 * n - 3), i) for i in range(n)]
        for i in range(n):
            for j in range(i + 1, n):
                ang = 1 / 2 ** (2 * n - i - j - 4)
                gates += [G.cx(i, anc), G.cx(j, anc), G.p(ang, anc), G.cx(j, anc), G.cx(i, anc)]
        return Circuit(width, gates, metadata={"label": "kinetic"})

    single, pair = _kinetic_coefficients(n, dt, params)
    if not use_ancilla:
        gates += [G.p(single[j], j) for j in range(n)]
        gates += [G.cp(b, i, j) for (i, j), b in pair.items()]
    else:
        shifted = list(single)
        for (i, j), b in pair.items():
            shifted[i] += b / 2
            shifted[j] += b / 2
        gates += [G.p(shifted[j], j) for j in range(n)]
        for (i, j), b in pair.items():
            gates += [G.cx(i, anc), G.cx(j, anc), G.p(-b / 2, anc), G.cx(j, anc), G.cx(i, anc)]
    return Circuit(width, gates, metadata={"label": "kinetic"})


def potential_gates(spec: PotentialSpec, dt: float, n: int, ancilla: int | None = None) -> list[G.Gate]:
    """Phase exp(-i v dt) on matching states, identity elsewhere (up to global phase)."""
    spec.mask(n)  # width check
    theta = spec.v * dt
    lits = spec.literals()
    if theta == 0 or not lits:
        return []
    if len(lits) == 1:
        (q, b), = lits.items()
        return [G.rz(-theta if b else theta, q)]
    flips = [G.x(q) for q, b in sorted(lits.items()) if b == 0]
    if len(lits) == 2:
        a, b = sorted(lits)
        if ancilla is not None:
            # filter gate: AND onto the ancilla, phase it, uncompute
            core = G.ccx(a, b, ancilla) + [G.p(-theta, ancilla)] + G.ccx(a, b, ancilla)
        else:
            core = [G.cp(-theta, a, b)]
        return flips + core + flips
    qubits = sorted(lits)
    phases = np.zeros(2 ** len(qubits))
    target = sum(lits[q] << i for i, q in enumerate(qubits))
    phases[target] = -theta
    return [G.diag(phases, qubits)]


def build_potential(spec: PotentialSpec, dt: float, n: int | None = None, use_ancilla: bool = False) -> Circuit:
    n = len(spec.pattern) if n is None else n
    width = n + (1 if use_ancilla else 0)
    return Circuit(width, potential_gates(spec, dt, n, n if use_ancilla else None), metadata={"label": "potential"})


def prepare_initial_state(spec: WavepacketSpec, disc: Discretization) -> StateVector:
    n = disc.n
    if spec.kind == "basis":
        if not 0 <= spec.k < disc.size:
            raise ValueError(f"basis index {spec.k} outside grid of {disc.size}")
        return StateVector.basis(n, spec.k)
    x = disc.grid
    images = math.ceil(6 * spec.sigma / disc.L) + 1
    mu = spec.mu % disc.L  # periodic box: only the center's position mod L matters
    env = np.zeros(disc.size)
    for m in range(-images, images + 1):
        env += np.exp(-0.5 * ((x - mu + m * disc.L) / spec.sigma) ** 2)
    amp = env / (np.sqrt(2 * np.pi) * spec.sigma) * np.exp(1j * spec.p * x)
    norm = np.linalg.norm(amp)
    if not norm > 0 or not np.isfinite(norm):
        raise ValueError("gaussian underflows on this grid; widen sigma or refine the grid")
    return StateVector(amp / norm)


def state_preparation(state: StateVector) -> list[G.Gate]:
    """Gates taking |0...0> exactly to ``state`` (global phase included).

    Magnitudes come from a cascade of uniformly controlled RY rotations (each
    a diagonal multiplexor conjugated by S H on its target); a final DIAG
    writes the complex phases.
    """
    a = state.amplitudes
    n = state.n
    nz = np.flatnonzero(np.abs(a) > 1e-15)
    if len(nz) == 1:
        k = int(nz[0])
        out = [G.x(q) for q in range(n) if (k >> q) & 1]
        ph = np.angle(a[k])
        if ph != 0:
            out.append(G.diag(np.where(np.arange(2**n) == k, ph, 0.0), range(n)))
        return out
    mag = np.abs(a) ** 2
    out: list[G.Gate] = []
    for j in reversed(range(n)):
        # mass per (bits above j, bit j)
        m = mag.reshape(2 ** (n - j - 1), 2, 2**j).sum(axis=2)
        tot = m.sum(axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            theta = np.where(tot > 0, 2 * np.arccos(np.sqrt(np.clip(m[:, 0] / tot, 0, 1))), 0.0)
        if not np.any(np.abs(theta) > 1e-15):
            continue
        if j == n - 1:
            mux = [G.rz(theta[0], j)]
        else:
            phases = np.empty(2 ** (n - j))
            phases[0::2] = -theta / 2
            phases[1::2] = theta / 2
            mux = [G.diag(phases, range(j, n))]
        out += [G.p(-np.pi / 2, j), G.h(j)] + mux + [G.h(j), G.p(np.pi / 2, j)]
    ph = np.where(np.abs(a) > 1e-15, np.angle(a), 0.0)
    if np.any(np.abs(ph) > 1e-15):
        out.append(G.diag(ph, range(n)))
    return out


def trotter_step_gates(disc: Discretization, potential: PotentialSpec, cfg: TrotterConfig, kinetic: KineticParams | None = None, composite_qft: bool = False) -> list[G.Gate]:
    n = disc.n
    kin = kinetic or KineticParams.for_grid(disc)
    anc = n if cfg.use_ancilla else None
    work = list(range(n))
    fwd = [G.qft(work)] if composite_qft else qft_gates(work)
    bwd = [G.iqft(work)] if composite_qft else qft_gates(work, inverse=True)
    k_gates = list(build_kinetic(n, cfg.dt, kin, cfg.use_ancilla).gates)
    if cfg.order == 1:
        return fwd + k_gates + bwd + potential_gates(potential, cfg.dt, n, anc)
    half = potential_gates(potential, cfg.dt / 2, n, anc)
    return half + fwd + k_gates + bwd + half


def build_time_evolution(disc: Discretization, potential: PotentialSpec, cfg: TrotterConfig, kinetic: KineticParams | None = None, steps: int | None = None, composite_qft: bool = False) -> Circuit:
    """``steps`` Trotter steps without state preparation; ancilla (if any) is qubit n."""
    steps = cfg.steps if steps is None else steps
    step = trotter_step_gates(disc, potential, cfg, kinetic, composite_qft)
    width = disc.n + (1 if cfg.use_ancilla else 0)
    meta = {"label": "time_evo", "working_qubits": disc.n, "ancilla": disc.n if cfg.use_ancilla else None}
    return Circuit(width, step * steps, metadata=meta)


def build_evolution_circuit(
    disc: Discretization,
    potential: PotentialSpec,
    init: WavepacketSpec,
    cfg: TrotterConfig,
    measure: bool = False,
    kinetic: KineticParams | None = None,
    composite_qft: bool = False,
) -> Circuit:
    prep = state_preparation(prepare_initial_state(init, disc))
    evo = build_time_evolution(disc, potential, cfg, kinetic, composite_qft=composite_qft)
    c = evo.replace(gates=tuple(prep) + evo.gates)
    if measure:
        c = c.measure_all(range(disc.n))
    return c


def working_probabilities(psi: StateVector, n: int) -> np.ndarray:
    """Marginal over qubits 0..n-1 (ancillas traced out)."""
    p = psi.probabilities()
    return p.reshape(-1, 2**n).sum(axis=0)


def working_unitary(circuit: Circuit, n: int) -> tuple[np.ndarray, float]:
    """Block of the circuit unitary with all qubits >= n in |0>, and the leakage out of it."""
    u = circuit_unitary(circuit)
    N = 2**n
    block = u[:N, :N]
    leak = float(np.max(np.abs(u[N:, :N]))) if u.shape[0] > N else 0.0
    return block, leak


def run_timeline(
    disc: Discretization,
    potential: PotentialSpec,
    init: WavepacketSpec,
    cfg: TrotterConfig,
    mode: str = "exact_state",
    shots: int | None = None,
    seed: int | None = None,
    kinetic: KineticParams | None = None,
) -> TimelineResult:
    """Working-register distribution after 0..steps Trotter steps.

    Each step's state is the statevector of the prefix circuit, computed
    incrementally. ``counts`` mode samples each row with a seed derived from
    (seed, step).
    """
    if mode not in ("exact_state", "counts"):
        raise ValueError(f"unknown timeline mode {mode!r}")
    if mode == "counts" and (shots is None or shots < 1 or seed is None):
        raise ValueError("counts mode needs shots >= 1 and a seed")
    n = disc.n
    width = n + (1 if cfg.use_ancilla else 0)
    prep = Circuit(width, state_preparation(prepare_initial_state(init, disc)))
    step = build_time_evolution(disc, potential, cfg, kinetic, steps=1)
    psi = simulate_statevector(prep)
    rows = []
    for t in range(cfg.steps + 1):
        if t:
            psi = simulate_statevector(step, psi)
        probs = working_probabilities(psi, n)
        if mode == "counts":
            reduced = StateVector(np.sqrt(probs / probs.sum()))
            cnt = sample_counts(reduced, shots, seed=np.random.SeedSequence([seed, t]))
            probs = cnt.vector(n)
        rows.append(probs)
    return TimelineResult(np.array(rows), potential.profile(n))


def _expm_hermitian(H: np.ndarray, t: float) -> np.ndarray:
    w, Q = np.linalg.eigh((H + H.conj().T) / 2)
    return Q @ np.diag(np.exp(-1j * w * t)) @ Q.conj().T


def trotter_product(K: np.ndarray, V: np.ndarray, dt: float, steps: int, order: int = 1) -> np.ndarray:
    """(e^{-iV dt} e^{-iK dt})^steps, or the symmetric split for order 2."""
    eK = _expm_hermitian(K, dt)
    if order == 1:
        step = _expm_hermitian(V, dt) @ eK
    else:
        half = _expm_hermitian(V, dt / 2)
        step = half @ eK @ half
    return np.linalg.matrix_power(step, steps)


def exact_evolution(H: np.ndarray, t: float) -> np.ndarray:
    return _expm_hermitian(H, t)


def dense_oracle(disc: Discretization, potential: PotentialSpec, cfg: TrotterConfig, kinetic: KineticParams | None = None) -> tuple[np.ndarray, np.ndarray]:
    """(Trotter product, exact exp(-i H t)) from explicit matrices, t = steps * dt."""
    n = disc.n
    if n > MAX_ORACLE_QUBITS:
        raise ValueError(f"dense oracle limited to {MAX_ORACLE_QUBITS} qubits")
    kin = kinetic or KineticParams.for_grid(disc)
    F = dft_matrix(n)
    K = F.conj().T @ np.diag(kin.momenta(n) ** 2 / 2) @ F
    V = np.diag(potential.profile(n))
    return trotter_product(K, V, cfg.dt, cfg.steps, cfg.order), exact_evolution(K + V, cfg.dt * cfg.steps)


def phase_aligned_distance(a: np.ndarray, b: np.ndarray) -> float:
    """max |a - e^{i g} b| with the global phase g taken from the largest entry of b."""
    i = np.unravel_index(np.argmax(np.abs(b)), b.shape)
    g = a[i] / b[i]
    g = g / abs(g)
    return float(np.max(np.abs(a - g * b)))
