"""Joint phase-shifter and true-time-delay precoding for wideband THz arrays."""

from .closed_form import (
    AppendixConstants,
    ScenarioParams,
    appendix_constants,
    baseline_design,
    max_nt_criterion,
    min_tmax_criterion,
    theorem1_design,
)
from .model import ArrayGeometry, OfdmGrid, PathSet, array_gain, channel_matrix, squint_profile, steering
from .precoder import HybridDesign, effective_beam, objective, sign_flip

__version__ = "0.1.0"

__all__ = [
    "AppendixConstants", "ArrayGeometry", "HybridDesign", "OfdmGrid", "PathSet", "ScenarioParams",
    "appendix_constants", "array_gain", "baseline_design", "channel_matrix", "effective_beam",
    "max_nt_criterion", "min_tmax_criterion", "objective", "sign_flip", "squint_profile",
    "steering", "theorem1_design",
]
