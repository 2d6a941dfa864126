"""Compile circuits onto a chip's coupling graph and native gate set."""

from .chip import ChipModel, line_chip, load_chip
from .passes import BasisSet, Layout, choose_layout, decompose, optimize, route, translate
from .pipeline import TranspileOptions, TranspileResult, adheres, equivalence_distance, transpile_pipeline

__all__ = [
    "BasisSet", "ChipModel", "Layout", "TranspileOptions", "TranspileResult", "adheres", "choose_layout",
    "decompose", "equivalence_distance", "line_chip", "load_chip", "optimize", "route", "translate",
    "transpile_pipeline",
]
