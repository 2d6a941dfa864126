"""Seed sweep of the end-to-end barrier run: E1 and E2 per seed for each extrapolator."""

import argparse
import json

import numpy as np

from qtunnel.mitigate import ZneConfig
from qtunnel.workflow import EndToEndConfig, run_endtoend

EXTRAPOLATORS = {
    "richardson": ZneConfig(),
    "polynomial(1)": ZneConfig(extrapolator="polynomial", degree=1),
    "polynomial(2)": ZneConfig(extrapolator="polynomial", degree=2),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--shots", type=int, default=100_000)
    ap.add_argument("--p2", type=float, default=0.004)
    ap.add_argument("--no-rem", action="store_true")
    ap.add_argument("--json", action="store_true", help="print one JSON document instead of a table")
    args = ap.parse_args()
    rows = {}
    for label, zne in EXTRAPOLATORS.items():
        reports = [
            run_endtoend(EndToEndConfig(p1=args.p2 / 10, p2=args.p2, zne=zne, rem=not args.no_rem,
                                        shots=args.shots, seed=s)).report
            for s in range(args.seeds)
        ]
        e1 = np.array([r.E1 for r in reports])
        e2 = np.array([r.E2 for r in reports])
        rows[label] = {"T": reports[0].T, "median_E1": float(np.median(e1)), "median_E2": float(np.median(e2)),
                       "E2": e2.round(5).tolist()}
    if args.json:
        print(json.dumps(rows, sort_keys=True, indent=2))
        return
    print(f"p2={args.p2} shots={args.shots} rem={not args.no_rem} seeds={args.seeds}")
    for label, r in rows.items():
        ok = r["median_E2"] <= r["median_E1"] / 3
        print(f"{label:14s} T={r['T']:.4f}  median E1={r['median_E1']:.4f}  median E2={r['median_E2']:.4f}  E2<=E1/3: {ok}")


if __name__ == "__main__":
    main()
