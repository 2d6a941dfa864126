"""Zero-noise extrapolation by local gate folding."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ..qcore import Circuit
from ..qcore import gates as G

DEFAULT_SCALES = (1.0, 1.5, 2.0, 2.5, 3.0)


@dataclass(frozen=True)
class ZneConfig:
    scale_factors: tuple = DEFAULT_SCALES
    extrapolator: str = "richardson"  # or "polynomial"
    degree: int = 2
    folding: str = "local"

    def __post_init__(self):
        lam = tuple(float(v) for v in self.scale_factors)
        object.__setattr__(self, "scale_factors", lam)
        if len(lam) < 2:
            raise ValueError("need at least two scale factors")
        if lam[0] != 1.0 or any(b <= a for a, b in zip(lam, lam[1:])):
            raise ValueError("scale factors must start at 1.0 and strictly increase")
        if self.extrapolator not in ("richardson", "polynomial"):
            raise ValueError(f"unknown extrapolator {self.extrapolator!r}")
        if self.extrapolator == "polynomial" and not 0 <= self.degree < len(lam):
            raise ValueError("polynomial degree must be below the number of scale factors")
        if self.folding != "local":
            raise ValueError("only local folding is implemented")

    @property
    def label(self) -> str:
        return "richardson" if self.extrapolator == "richardson" else f"polynomial({self.degree})"


def fold_count(num_gates: int, lam: float) -> int:
    """Number of G G^dagger pairs inserted: round(N (lam - 1) / 2), halves rounded up."""
    return int(math.floor(num_gates * (lam - 1) / 2 + 0.5))


def fold_local(circuit: Circuit, lam: float) -> Circuit:
    """Replace gates G by G G^dagger G, first gates first.

    Pairs are spread round-robin so that lam > 3 folds every gate more than
    once; the result has N + 2d unitary gates. Measurements are left alone.
    """
    if lam < 1:
        raise ValueError("scale factor must be >= 1")
    ops = [g for g in circuit.gates if g.name != "MEASURE"]
    meas = [g for g in circuit.gates if g.name == "MEASURE"]
    n = len(ops)
    d = fold_count(n, lam) if n else 0
    if d == 0:
        return circuit
    base, extra = divmod(d, n)
    out = []
    for i, g in enumerate(ops):
        out.append(g)
        inv = G.inverse(g)
        for _ in range(base + (i < extra)):
            out += [inv, g]
    meta = dict(circuit.metadata, fold_scale=lam)
    return circuit.replace(gates=tuple(out + meas), metadata=meta)


def richardson(lams: Sequence[float], values: Sequence[float]) -> float:
    """Value at 0 of the interpolating polynomial through all points (Lagrange form)."""
    lams = np.asarray(lams, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(np.unique(lams)) != len(lams):
        raise ValueError("scale factors must be distinct")
    total = 0.0
    for i, (li, ei) in enumerate(zip(lams, values)):
        w = 1.0
        for j, lj in enumerate(lams):
            if j != i:
                w *= lj / (lj - li)
        total += w * ei
    return float(total)


def polynomial_fit(lams: Sequence[float], values: Sequence[float], degree: int) -> float:
    """Least-squares polynomial of ``degree`` evaluated at 0."""
    lams = np.asarray(lams, dtype=float)
    if len(np.unique(lams)) <= degree:
        raise ValueError("not enough distinct scale factors for this degree")
    V = np.vander(lams, degree + 1, increasing=True)
    coef, *_ = np.linalg.lstsq(V, np.asarray(values, dtype=float), rcond=None)
    return float(coef[0])


def extrapolate(lams, values, method: str = "richardson", degree: int = 2) -> float:
    if method == "richardson":
        return richardson(lams, values)
    if method == "polynomial":
        return polynomial_fit(lams, values, degree)
    raise ValueError(f"unknown extrapolator {method!r}")


@dataclass
class ZneResult:
    value: float
    points: list = field(default_factory=list)  # [(lam, E)]
    extrapolator: str = "richardson"


def zne_estimate(executor: Callable[[Circuit], float], circuit: Circuit, config: ZneConfig | None = None) -> ZneResult:
    """Evaluate the executor on folded copies and extrapolate to zero noise.

    The executor sees only folded circuits; do not optimize them afterwards.
    """
    cfg = config or ZneConfig()
    points = []
    for lam in cfg.scale_factors:
        e = float(executor(fold_local(circuit, lam)))
        if not np.isfinite(e):
            raise ValueError(f"executor returned {e} at scale {lam}")
        points.append((lam, e))
    lams, vals = zip(*points)
    value = extrapolate(lams, vals, cfg.extrapolator, cfg.degree)
    return ZneResult(value, points, cfg.label)
