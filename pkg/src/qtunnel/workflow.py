"""End-to-end transmission estimate: build, transpile, fold, pack, run noisy, extrapolate."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .mitigate import MitigationReport, ZneConfig, apply_rem, build_confusion_matrix, extrapolate, fold_local
from .multiprog import PackingPlan, merge, pack, split_counts
from .qcore import Circuit, CountsDistribution, NoiseModel, execute
from .qcore.measure import bitstring
from .transpile import ChipModel, load_chip, transpile_pipeline
from .tunnel import (
    Discretization,
    PotentialSpec,
    TrotterConfig,
    WavepacketSpec,
    build_evolution_circuit,
    dense_oracle,
    prepare_initial_state,
)


@dataclass(frozen=True)
class EndToEndConfig:
    """Defaults reproduce the two-qubit barrier run: |00> through "x1" for 7 steps of 0.1."""

    disc: Discretization = field(default_factory=lambda: Discretization(2, 2.035))
    potential: PotentialSpec = field(default_factory=lambda: PotentialSpec("x1", v=1.0))
    initial: WavepacketSpec = field(default_factory=lambda: WavepacketSpec.basis(0))
    trotter: TrotterConfig = field(default_factory=lambda: TrotterConfig(dt=0.1, steps=7))
    target: int = 0b10  # basis state counted as transmitted
    chip: str = "osaka"
    p1: float = 0.0004
    p2: float = 0.004
    readout: str | float = "chip"  # "chip", a uniform flip probability, or 0
    zne: ZneConfig = field(default_factory=lambda: ZneConfig(extrapolator="polynomial", degree=2))
    rem: bool = True
    rem_shots: int = 100_000
    multiprogram: bool = True
    buffer: int = 2
    shots: int = 100_000
    seed: int = 0


@dataclass
class EndToEndResult:
    report: MitigationReport
    plan: PackingPlan | None
    transpile_report: dict
    raw_counts: list  # per scale factor

    def to_dict(self) -> dict:
        out = {"report": self.report.to_dict(), "transpile": self.transpile_report,
               "counts": [c.to_dict() for c in self.raw_counts]}
        if self.plan is not None:
            out["plan"] = self.plan.to_dict()
            out["utilization"] = self.plan.utilization().to_dict()
        return out


def ideal_transmission(cfg: EndToEndConfig) -> float:
    """Probability of ``target`` after the Trotterized evolution, from the dense oracle."""
    trot, _ = dense_oracle(cfg.disc, cfg.potential, cfg.trotter)
    psi = trot @ prepare_initial_state(cfg.initial, cfg.disc).amplitudes
    return float(abs(psi[cfg.target]) ** 2)


def noise_for(cfg: EndToEndConfig, chip: ChipModel, qubits) -> NoiseModel:
    if cfg.readout == "chip":
        return chip.noise_model(qubits, cfg.p1, cfg.p2)
    f = float(cfg.readout)
    if not 0 <= f <= 0.5:
        raise ValueError("readout flip probability must lie in [0, 0.5]")
    ro = {q: [[1 - f, f], [f, 1 - f]] for q in qubits} if f else {}
    return NoiseModel(cfg.p1, cfg.p2, ro)


def _calibrate(cfg, chip, noise, physical, seed):
    """Confusion matrix for the qubits read into each classical bit, through the same noisy executor."""
    n = len(physical)
    seeds = itertools.count(seed)

    def executor(c: Circuit, shots: int) -> CountsDistribution:
        placed = c.remap(dict(enumerate(physical)), chip.num_qubits)
        return execute(placed, shots, seed=next(seeds), noise=noise)

    return build_confusion_matrix(executor, n, cfg.rem_shots, "correlated")


def _estimate(cfg, counts: CountsDistribution, M) -> float:
    if M is None:
        return counts.probabilities().get(bitstring(cfg.target, counts.width), 0.0)
    return float(apply_rem(M, counts).probabilities[cfg.target])


def run_endtoend(cfg: EndToEndConfig) -> EndToEndResult:
    """One shot-noisy ZNE estimate of the transmission.

    The circuit is compiled once and folded afterwards, so the optimizer never
    sees the inserted pairs. With ``multiprogram`` the folded copies are
    packed into separate regions and run as one merged circuit; otherwise
    each runs on the compiled layout in turn.
    """
    chip = load_chip(cfg.chip)
    circuit = build_evolution_circuit(cfg.disc, cfg.potential, cfg.initial, cfg.trotter, measure=True)
    lams = cfg.zne.scale_factors
    run_seed, cal_seed = (int(s.generate_state(1)[0]) for s in np.random.SeedSequence(cfg.seed).spawn(2))

    compiled = transpile_pipeline(circuit, chip)
    used = sorted(compiled.circuit.active_qubits())
    local = compiled.circuit.remap({p: i for i, p in enumerate(used)}, len(used))
    folded = [fold_local(local, lam) for lam in lams]
    meas = local.measurements()

    if cfg.multiprogram:
        plan = pack(folded, chip, cfg.buffer)
        merged = merge(folded, plan)
        noise = noise_for(cfg, chip, sorted(merged.active_qubits()))
        counts = split_counts(execute(merged, cfg.shots, seed=run_seed, noise=noise), plan)
        readout_qubits = [[a.map[meas[i]] for i in range(len(meas))] for a in plan.assignments]
    else:
        plan = None
        noise = noise_for(cfg, chip, used)
        counts = [execute(c.remap(dict(enumerate(used)), chip.num_qubits), cfg.shots, seed=run_seed + k, noise=noise)
                  for k, c in enumerate(folded)]
        readout_qubits = [[used[meas[i]] for i in range(len(meas))]] * len(lams)

    values = []
    for k, c in enumerate(counts):
        M = _calibrate(cfg, chip, noise, readout_qubits[k], cal_seed + 100 * k) if cfg.rem else None
        values.append(_estimate(cfg, c, M))
    T_em = extrapolate(lams, values, cfg.zne.extrapolator, cfg.zne.degree)
    report = MitigationReport(ideal_transmission(cfg), values[0], T_em, tuple(zip(lams, values)), cfg.zne.label)
    return EndToEndResult(report, plan, compiled.report, counts)


@dataclass(frozen=True)
class RemConfig:
    """Readout correction of the two-qubit barrier run on a small chip."""

    disc: Discretization = field(default_factory=lambda: Discretization(2, 2.035))
    potential: PotentialSpec = field(default_factory=lambda: PotentialSpec("x1", v=1.0))
    initial: WavepacketSpec = field(default_factory=lambda: WavepacketSpec.basis(0))
    trotter: TrotterConfig = field(default_factory=lambda: TrotterConfig(dt=0.1, steps=7))
    chip: str = "nairobi"
    p1: float = 0.0
    p2: float = 0.0
    readout: str | float = "chip"
    mode: str = "correlated"
    shots: int = 100_000
    calibration_shots: int = 100_000
    seed: int = 0


@dataclass
class RemRun:
    confusion: object
    raw: np.ndarray
    mitigated: np.ndarray
    ideal: np.ndarray
    clipped_mass: float
    layout: tuple

    def to_dict(self) -> dict:
        n = self.confusion.n
        as_map = lambda v: {bitstring(i, n): float(x) for i, x in enumerate(v)}
        tv = lambda v: 0.5 * float(np.abs(v - self.ideal).sum())
        return {
            "confusion": self.confusion.to_dict(),
            "raw": as_map(self.raw),
            "mitigated": as_map(self.mitigated),
            "ideal": as_map(self.ideal),
            "tv_raw": tv(self.raw),
            "tv_mitigated": tv(self.mitigated),
            "clipped_mass": self.clipped_mass,
            "layout": list(self.layout),
        }


def run_rem(cfg: RemConfig) -> RemRun:
    """Compile, run with noise, then correct the counts with a calibrated confusion matrix."""
    chip = load_chip(cfg.chip)
    circuit = build_evolution_circuit(cfg.disc, cfg.potential, cfg.initial, cfg.trotter, measure=True)
    compiled = transpile_pipeline(circuit, chip)
    used = sorted(compiled.circuit.active_qubits())
    noise = noise_for(cfg, chip, used)
    run_seed, cal_seed = (int(s.generate_state(1)[0]) for s in np.random.SeedSequence(cfg.seed).spawn(2))
    counts = execute(compiled.circuit, cfg.shots, seed=run_seed, noise=noise)
    meas = compiled.circuit.measurements()
    physical = [meas[i] for i in range(counts.width)]

    seeds = itertools.count(cal_seed)

    def executor(c: Circuit, shots: int) -> CountsDistribution:
        return execute(c.remap(dict(enumerate(physical)), chip.num_qubits), shots, seed=next(seeds), noise=noise)

    M = build_confusion_matrix(executor, len(physical), cfg.calibration_shots, cfg.mode)
    res = apply_rem(M, counts)
    trot, _ = dense_oracle(cfg.disc, cfg.potential, cfg.trotter)
    ideal = np.abs(trot @ prepare_initial_state(cfg.initial, cfg.disc).amplitudes) ** 2
    return RemRun(M, counts.vector(M.n), res.probabilities, ideal, res.clipped_mass, tuple(physical))
