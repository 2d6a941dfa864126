"""Write the shipped chip files: a 7-qubit T-shaped symmetric chip and a
127-qubit heavy-hex chip with one native direction per edge.

Error rates are representative draws (fixed seed), not calibration data.
"""

import json
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parents[1] / "src" / "qtunnel" / "transpile" / "chips"


def heavy_hex_127():
    rows = [range(0, 14), range(18, 33), range(37, 52), range(56, 71), range(75, 90), range(94, 109), range(113, 127)]
    edges = [(a, a + 1) for r in rows for a in list(r)[:-1]]
    bridges = {
        14: (0, 18), 15: (4, 22), 16: (8, 26), 17: (12, 30),
        33: (20, 39), 34: (24, 43), 35: (28, 47), 36: (32, 51),
        52: (37, 56), 53: (41, 60), 54: (45, 64), 55: (49, 68),
        71: (58, 77), 72: (62, 81), 73: (66, 85), 74: (70, 89),
        90: (75, 94), 91: (79, 98), 92: (83, 102), 93: (87, 106),
        109: (96, 114), 110: (100, 118), 111: (104, 122), 112: (108, 126),
    }
    for b, (up, down) in bridges.items():
        edges += [(min(up, b), max(up, b)), (min(b, down), max(b, down))]
    # one native direction per coupler
    return sorted((a, b) if a % 2 == 0 else (b, a) for a, b in edges)


def chip(num_qubits, edges, symmetric, cx_range, sx_range, ro_range, seed):
    rng = np.random.default_rng(seed)
    errors = {}
    for q in range(num_qubits):
        e = round(float(rng.uniform(*sx_range)), 6)
        errors[f"sx:{q}"] = e
        errors[f"x:{q}"] = e
    for a, b in edges:
        e = round(float(rng.uniform(*cx_range)), 6)
        errors[f"cx:{a},{b}"] = e
        if symmetric:
            errors[f"cx:{b},{a}"] = e
    readout = [round(float(v), 6) for v in rng.uniform(*ro_range, size=num_qubits)]
    return {"num_qubits": num_qubits, "symmetric": symmetric, "edges": [list(e) for e in edges],
            "gate_errors": errors, "readout_errors": readout}


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    t_shape = [(0, 1), (1, 2), (1, 3), (3, 5), (4, 5), (5, 6)]
    files = {
        "nairobi.json": chip(7, t_shape, True, (0.006, 0.015), (2e-4, 5e-4), (0.015, 0.04), seed=7),
        "osaka.json": chip(127, heavy_hex_127(), False, (0.004, 0.012), (1e-4, 4e-4), (0.008, 0.04), seed=127),
    }
    for name, data in files.items():
        (OUT / name).write_text(json.dumps(data, indent=1, sort_keys=True) + "\n")
        print(f"wrote {OUT / name}: {len(data['edges'])} edges")


if __name__ == "__main__":
    main()
