"""Command-line front end: one JSON scenario in, result files out.

Exit codes: 0 success, 2 invalid configuration, 3 pipeline failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .hadamard import build_hadamard_test, exact_re_im, extract_re_im
from .mitigate import ZneConfig
from .multiprog import merge, pack, split_counts
from .qcore import execute
from .transpile import load_chip, transpile_pipeline
from .tunnel import (
    Discretization,
    PotentialSpec,
    TrotterConfig,
    WavepacketSpec,
    build_evolution_circuit,
    run_timeline,
)
from .workflow import EndToEndConfig, RemConfig, run_endtoend, run_rem

EXIT_OK, EXIT_CONFIG, EXIT_PIPELINE = 0, 2, 3
COMMANDS = ("simulate", "endtoend", "rem", "transpile", "hadamard", "pack")
SAMPLING = {"endtoend", "rem", "hadamard", "pack"}


class ConfigError(ValueError):
    pass


def load_schema(name: str) -> dict:
    return json.loads((resources.files("qtunnel") / "schemas" / f"{name}.schema.json").read_text())


def validate(doc, name: str) -> None:
    jsonschema.validate(doc, load_schema(name))


# -- configuration ----------------------------------------------------------

@dataclass(frozen=True)
class ScenarioConfig:
    command: str
    disc: Discretization
    potential: PotentialSpec
    initial: WavepacketSpec
    trotter: TrotterConfig
    chip: str = "osaka"
    chips: tuple = ("nairobi", "osaka")
    p1: float = 0.0
    p2: float = 0.0
    readout: str | float = "chip"
    shots: int | None = None
    seed: int | None = None
    zne: ZneConfig | None = None
    rem: bool = False
    rem_mode: str = "correlated"
    calibration_shots: int = 100_000
    multiprogram: bool = True
    buffer: int = 2
    copies: int = 2
    mode: str = "exact_state"
    pgm: bool = False
    target: int = 0b10
    output: str = "out"
    source: dict = field(default_factory=dict, compare=False, repr=False)

    @classmethod
    def from_dict(cls, d: dict, base: Path | None = None) -> "ScenarioConfig":
        try:
            validate(d, "config")
        except jsonschema.ValidationError as e:
            raise ConfigError(f"invalid config at {'/'.join(map(str, e.absolute_path)) or '<root>'}: {e.message}") from None
        try:
            init = dict(d.get("initial", {"kind": "basis", "k": 0}))
            if "state" in init:
                init["k"] = int(init.pop("state"), 2)
            noise = d.get("noise", {})
            zne = d.get("zne")
            def locate(name):
                # chip files are relative to the config; bare names are shipped chips
                return str((base / name).resolve()) if base is not None and name.endswith(".json") else name

            cfg = cls(
                command=d.get("command", "simulate"),
                disc=Discretization(**d["discretization"]),
                potential=PotentialSpec(**d["potential"]),
                initial=WavepacketSpec(**init),
                trotter=TrotterConfig(**d.get("trotter", {})),
                chip=locate(d.get("chip", "osaka")),
                chips=tuple(locate(c) for c in d.get("chips", ("nairobi", "osaka"))),
                p1=noise.get("p1", 0.0),
                p2=noise.get("p2", 0.0),
                readout=noise.get("readout", "chip"),
                shots=d.get("shots"),
                seed=d.get("seed"),
                zne=ZneConfig(**{**zne, "scale_factors": tuple(zne.get("scale_factors", (1.0, 1.5, 2.0, 2.5, 3.0)))}) if zne else None,
                rem=d.get("rem", False),
                rem_mode=d.get("rem_mode", "correlated"),
                calibration_shots=d.get("calibration_shots", 100_000),
                multiprogram=d.get("multiprogram", True),
                buffer=d.get("buffer", 2),
                copies=d.get("copies", 2),
                mode=d.get("mode", "exact_state"),
                pgm=d.get("pgm", False),
                target=int(d.get("target", "10"), 2),
                output=d.get("output", "out"),
                source=d,
            )
        except (TypeError, ValueError) as e:
            raise ConfigError(str(e)) from None
        for name in (cfg.chip,) + cfg.chips:
            if name.endswith(".json") and not Path(name).is_file():
                raise ConfigError(f"chip file {name} does not exist")
        return cfg

    def check_runnable(self) -> None:
        sampling = self.command in SAMPLING or (self.command == "simulate" and self.mode == "counts")
        if sampling and self.seed is None:
            raise ConfigError(f"{self.command} samples measurements and needs a seed")
        if sampling and not self.shots:
            raise ConfigError(f"{self.command} needs shots")
        if self.command == "endtoend" and self.zne is None:
            raise ConfigError("endtoend needs a zne section")


def load_config(path: str) -> ScenarioConfig:
    p = Path(path)
    if not p.is_file():
        # fall back to a shipped scenario name
        res = resources.files("qtunnel") / "scenarios" / (p.name if p.suffix else f"{p.name}.json")
        if not res.is_file():
            raise ConfigError(f"config {path} not found")
        return ScenarioConfig.from_dict(json.loads(res.read_text()))
    try:
        d = json.loads(p.read_text())
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: {e}") from None
    return ScenarioConfig.from_dict(d, p.parent)


# -- output helpers ---------------------------------------------------------

def dump_json(doc, path: Path, schema: str | None = None) -> None:
    if schema:
        validate(doc, schema)
    path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")


def timeline_pgm(probs: np.ndarray) -> str:
    """Plain PGM: one row per timestep, one column per state, scaled to the largest probability."""
    peak = float(probs.max()) or 1.0
    pix = np.rint(255 * probs / peak).astype(int)
    rows = [" ".join(map(str, r)) for r in pix]
    return f"P2\n{probs.shape[1]} {probs.shape[0]}\n255\n" + "\n".join(rows) + "\n"


def _circuit(cfg: ScenarioConfig, measure: bool = True):
    return build_evolution_circuit(cfg.disc, cfg.potential, cfg.initial, cfg.trotter, measure=measure)


# -- commands ---------------------------------------------------------------

def cmd_simulate(cfg: ScenarioConfig, out: Path) -> list[str]:
    tl = run_timeline(cfg.disc, cfg.potential, cfg.initial, cfg.trotter, cfg.mode, cfg.shots, cfg.seed)
    (out / "timeline.csv").write_text(tl.to_csv())
    (out / "potential.csv").write_text(tl.potential_csv())
    files = ["timeline.csv", "potential.csv"]
    if cfg.pgm:
        (out / "timeline.pgm").write_text(timeline_pgm(tl.probabilities))
        files.append("timeline.pgm")
    return files


def cmd_endtoend(cfg: ScenarioConfig, out: Path) -> list[str]:
    e2e = EndToEndConfig(
        disc=cfg.disc, potential=cfg.potential, initial=cfg.initial, trotter=cfg.trotter, chip=cfg.chip,
        p1=cfg.p1, p2=cfg.p2, readout=cfg.readout, zne=cfg.zne, rem=cfg.rem, rem_shots=cfg.calibration_shots,
        multiprogram=cfg.multiprogram, buffer=cfg.buffer, shots=cfg.shots, seed=cfg.seed, target=cfg.target,
    )
    res = run_endtoend(e2e)
    dump_json(res.report.to_dict(), out / "report.json", "report")
    files = ["report.json"]
    if res.plan is not None:
        dump_json(res.plan.to_dict(), out / "plan.json", "plan")
        print(res.plan.utilization())
        files.append("plan.json")
    run = res.to_dict()
    del run["report"]
    dump_json(run, out / "run.json")
    return files + ["run.json"]


def cmd_rem(cfg: ScenarioConfig, out: Path) -> list[str]:
    rc = RemConfig(cfg.disc, cfg.potential, cfg.initial, cfg.trotter, cfg.chip, cfg.p1, cfg.p2, cfg.readout,
                   cfg.rem_mode, cfg.shots, cfg.calibration_shots, cfg.seed)
    run = run_rem(rc).to_dict()
    dump_json(run.pop("confusion"), out / "confusion.json", "confusion")
    dump_json(run, out / "rem.json", "rem")
    return ["confusion.json", "rem.json"]


def cmd_transpile(cfg: ScenarioConfig, out: Path) -> list[str]:
    circuit = _circuit(cfg)
    files = []
    for name in cfg.chips:
        chip = load_chip(name)
        r = transpile_pipeline(circuit, chip)
        fname = f"transpile_{Path(name).stem}.json"
        dump_json(r.to_dict(), out / fname, "transpile")
        files.append(fname)
    return files


def cmd_hadamard(cfg: ScenarioConfig, out: Path) -> list[str]:
    base = _circuit(cfg, measure=False)
    test = build_hadamard_test(base)
    d = extract_re_im(execute(test.wrapped, cfg.shots, seed=cfg.seed)).to_dict()
    dump_json(d, out / "hadamard.json", "hadamard")
    re2, im2 = exact_re_im(base)
    dump_json({"re": re2.tolist(), "im": im2.tolist()}, out / "hadamard_exact.json")
    return ["hadamard.json", "hadamard_exact.json"]


def cmd_pack(cfg: ScenarioConfig, out: Path) -> list[str]:
    chip = load_chip(cfg.chip)
    circuits = [_circuit(cfg)] * cfg.copies
    plan = pack(circuits, chip, cfg.buffer)
    print(plan.utilization())
    parts = split_counts(execute(merge(circuits, plan), cfg.shots, seed=cfg.seed), plan)
    dump_json(plan.to_dict(), out / "plan.json", "plan")
    dump_json({"utilization": plan.utilization().to_dict(), "counts": [p.to_dict() for p in parts]},
              out / "counts.json", "pack_counts")
    return ["plan.json", "counts.json"]


HANDLERS = {
    "simulate": cmd_simulate, "endtoend": cmd_endtoend, "rem": cmd_rem,
    "transpile": cmd_transpile, "hadamard": cmd_hadamard, "pack": cmd_pack,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qtunnel", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="scenario JSON file or shipped scenario name")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="output directory (overrides the config)")
        p.add_argument("--shots", type=int)
    return parser


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        overrides = {k: v for k, v in (("seed", args.seed), ("shots", args.shots), ("output", args.out)) if v is not None}
        cfg = replace(cfg, command=args.command, **overrides)
        if cfg.shots is not None and cfg.shots < 1:
            raise ConfigError("shots must be positive")
        cfg.check_runnable()
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(cfg.output)
    try:
        out.mkdir(parents=True, exist_ok=True)
        files = HANDLERS[cfg.command](cfg, out)
    except (ValueError, RuntimeError, OSError, jsonschema.ValidationError) as e:
        print(f"{cfg.command} failed: {e}", file=sys.stderr)
        return EXIT_PIPELINE
    for f in files:
        print(out / f)
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
