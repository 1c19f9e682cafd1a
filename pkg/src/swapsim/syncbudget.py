"""How far apart the two sources may be, and what timing jitter costs."""

from __future__ import annotations

from dataclasses import dataclass

from .sources import SPEED_OF_LIGHT, coherence_time_fs, mode_overlap

DISTANCE_CAVEAT = (
    "c/bandwidth only bounds signal propagation; path-length fluctuations and "
    "noise on the transmitted reference signal reduce the usable distance further."
)


@dataclass(frozen=True)
class SyncBudget:
    feedback_bandwidth_hz: float = 10e3
    jitter_fs: float = 260.0
    filter_fwhm_nm: float = 0.4
    center_nm: float = 788.5

    def __post_init__(self) -> None:
        if self.feedback_bandwidth_hz <= 0:
            raise ValueError("feedback bandwidth must be positive")

    @property
    def max_distance_km(self) -> float:
        return max_distance_km(self.feedback_bandwidth_hz)

    @property
    def visibility(self) -> float:
        return visibility_penalty(self.jitter_fs, self.filter_fwhm_nm, self.center_nm)


def max_distance_km(feedback_bandwidth_hz: float) -> float:
    if feedback_bandwidth_hz <= 0:
        raise ValueError("feedback bandwidth must be positive")
    return SPEED_OF_LIGHT / feedback_bandwidth_hz / 1e3


def visibility_penalty(jitter_fs: float, filter_fwhm_nm: float, center_nm: float) -> float:
    """Mode overlap of two identically filtered photons at zero mean delay."""
    tau = coherence_time_fs(filter_fwhm_nm, center_nm)
    return mode_overlap(0.0, jitter_fs, tau, tau)
