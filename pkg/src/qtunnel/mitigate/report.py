from __future__ import annotations

import json
from dataclasses import dataclass, field


@dataclass(frozen=True)
class MitigationReport:
    """Ideal T, raw estimate T_run and mitigated T_em, with both errors."""

    T: float
    T_run: float
    T_em: float
    points: tuple = field(default_factory=tuple)
    extrapolator: str = "richardson"

    @property
    def E1(self) -> float:
        return self.T - self.T_run

    @property
    def E2(self) -> float:
        return abs(self.T - self.T_em)

    def to_dict(self) -> dict:
        return {
            "T": self.T,
            "T_run": self.T_run,
            "E1": self.E1,
            "T_em": self.T_em,
            "E2": self.E2,
            "points": [[float(l), float(e)] for l, e in self.points],
            "extrapolator": self.extrapolator,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "MitigationReport":
        r = cls(d["T"], d["T_run"], d["T_em"], tuple(tuple(p) for p in d.get("points", ())), d.get("extrapolator", "richardson"))
        if abs(r.E1 - d.get("E1", r.E1)) > 1e-12 or abs(r.E2 - d.get("E2", r.E2)) > 1e-12:
            raise ValueError("E1/E2 inconsistent with T, T_run, T_em")
        return r
