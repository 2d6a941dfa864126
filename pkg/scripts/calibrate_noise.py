"""Exact (shot-free) transmission of the compiled barrier circuit versus two-qubit error rate.

Used to pick the depolarizing strength that puts the unmitigated error in a
chosen band; the one-qubit rate is a tenth of the two-qubit rate.
"""

import argparse

import numpy as np

from qtunnel.mitigate import extrapolate, fold_local
from qtunnel.qcore import NoiseModel
from qtunnel.qcore.measure import measured_distribution
from qtunnel.transpile import load_chip, transpile_pipeline
from qtunnel.tunnel import build_evolution_circuit
from qtunnel.workflow import EndToEndConfig, ideal_transmission

LAMS = (1.0, 1.5, 2.0, 2.5, 3.0)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p2", type=float, nargs="+", default=[0.002, 0.003, 0.004, 0.005, 0.006])
    ap.add_argument("--readout", type=float, default=0.0, help="uniform flip probability")
    ap.add_argument("--band", type=float, nargs=2, default=(0.15, 0.30))
    args = ap.parse_args()
    cfg = EndToEndConfig()
    circuit = build_evolution_circuit(cfg.disc, cfg.potential, cfg.initial, cfg.trotter, measure=True)
    r = transpile_pipeline(circuit, load_chip(cfg.chip))
    used = sorted(r.circuit.active_qubits())
    local = r.circuit.remap({p: i for i, p in enumerate(used)}, len(used))
    T = ideal_transmission(cfg)
    print(f"T={T:.4f}; compiled: {r.report['output']}")
    for p2 in args.p2:
        ro = {q: [[1 - args.readout, args.readout], [args.readout, 1 - args.readout]] for q in range(len(used))}
        noise = NoiseModel(p2 / 10, p2, ro if args.readout else {})
        values = []
        for lam in LAMS:
            (_, probs), = measured_distribution(fold_local(local, lam), noise)
            values.append(probs[cfg.target])
        e1 = T - values[0]
        lo, hi = args.band
        print(f"p2={p2:.4f}  E1={e1:.4f}{' (in band)' if lo <= e1 <= hi else ''}  "
              f"richardson={extrapolate(LAMS, values):.4f}  poly2={extrapolate(LAMS, values, 'polynomial', 2):.4f}  "
              f"E(lam)={np.round(values, 4).tolist()}")


if __name__ == "__main__":
    main()
