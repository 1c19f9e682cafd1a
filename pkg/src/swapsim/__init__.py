"""Entanglement swapping between independent pulsed photon-pair sources."""

from .bsm import BsmModel, BsmOutcome, Signature, bsm_signature_map, swap, swapped_correlation
from .chsh import (
    AngleSettings,
    ChshResult,
    CorrelationEstimate,
    Variant,
    chsh_S,
    estimate_from_counts,
    normalize_fourfolds,
    violation_significance,
)
from .mcsim import CountsTable, HomScanResult, RunConfig, accidental_rate, fit_gaussian, hom_scan, simulate_run
from .qcore import BellLabel, DensityMatrix, PolarizerSetting, PureState, bell_state, correlation, partial_trace, tensor
from .sources import SourceParams, TimingParams, coherence_time_fs, emit_state, mode_overlap
from .syncbudget import SyncBudget, max_distance_km, visibility_penalty

__version__ = "0.1.0"

__all__ = [
    "AngleSettings", "BellLabel", "BsmModel", "BsmOutcome", "ChshResult", "CorrelationEstimate",
    "CountsTable", "DensityMatrix", "HomScanResult", "PolarizerSetting", "PureState", "RunConfig",
    "Signature", "SourceParams", "SyncBudget", "TimingParams", "Variant",
    "accidental_rate", "bell_state", "bsm_signature_map", "chsh_S", "coherence_time_fs", "correlation",
    "emit_state", "estimate_from_counts", "fit_gaussian", "hom_scan", "max_distance_km", "mode_overlap",
    "normalize_fourfolds", "partial_trace", "simulate_run", "swap", "swapped_correlation", "tensor",
    "violation_significance", "visibility_penalty",
]
