"""Error mitigation: zero-noise extrapolation and readout correction."""

from .rem import ConfusionMatrix, RemResult, apply_rem, build_confusion_matrix, calibration_circuit, total_variation
from .report import MitigationReport
from .zne import ZneConfig, ZneResult, extrapolate, fold_count, fold_local, polynomial_fit, richardson, zne_estimate

__all__ = [
    "ConfusionMatrix", "MitigationReport", "RemResult", "ZneConfig", "ZneResult", "apply_rem",
    "build_confusion_matrix", "calibration_circuit", "extrapolate", "fold_count", "fold_local",
    "polynomial_fit", "richardson", "total_variation", "zne_estimate",
]
