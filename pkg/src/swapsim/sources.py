"""Photon-pair source model and temporal-mode overlap of the interfering photons."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .qcore import BellLabel, DensityMatrix, bell_state

SPEED_OF_LIGHT = 299_792_458.0  # m/s
GAUSSIAN_TBP = 0.441  # intensity FWHM time-bandwidth product of a Gaussian pulse
FWHM_PER_SIGMA = 2.0 * math.sqrt(2.0 * math.log(2.0))


@dataclass(frozen=True)
class SourceParams:
    """One SPDC source emitting into an analyzer arm and a BSM arm.

    ``state_visibility`` is the Werner weight of the target Bell state and
    ``pair_probability`` the chance of one pair per pump pulse.
    """

    target: BellLabel = BellLabel.PSI_MINUS
    state_visibility: float = 1.0
    pair_probability: float = 0.01
    bsm_filter_fwhm_nm: float = 0.4
    analyzer_filter_fwhm_nm: float = 3.0
    center_wavelength_nm: float = 788.5

    def __post_init__(self) -> None:
        object.__setattr__(self, "target", BellLabel(self.target))
        for name in ("state_visibility", "pair_probability"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")
        for name in ("bsm_filter_fwhm_nm", "analyzer_filter_fwhm_nm", "center_wavelength_nm"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    @property
    def bsm_coherence_time_fs(self) -> float:
        return coherence_time_fs(self.bsm_filter_fwhm_nm, self.center_wavelength_nm)


@dataclass(frozen=True)
class TimingParams:
    pulse_period_ns: float = 13.0
    sync_jitter_fs: float = 260.0
    static_delay_fs: float = 0.0

    def __post_init__(self) -> None:
        if self.pulse_period_ns <= 0:
            raise ValueError("pulse_period_ns must be positive")
        if self.sync_jitter_fs < 0:
            raise ValueError("sync_jitter_fs must be non-negative")


def emit_state(params: SourceParams) -> DensityMatrix:
    """Werner mixture ``v |target><target| + (1 - v) I/4``."""
    v = params.state_visibility
    target = bell_state(params.target).density().matrix
    return DensityMatrix.from_unnormalized(v * target + (1 - v) * np.eye(4) / 4)


def coherence_time_fs(fwhm_nm: float, center_nm: float) -> float:
    """Intensity FWHM duration (fs) of a transform-limited Gaussian wavepacket
    behind a filter of the given spectral FWHM."""
    if fwhm_nm <= 0 or center_nm <= 0:
        raise ValueError("filter width and wavelength must be positive")
    dnu_hz = SPEED_OF_LIGHT * (fwhm_nm * 1e-9) / (center_nm * 1e-9) ** 2
    return GAUSSIAN_TBP / dnu_hz * 1e15


def mode_overlap(delay_fs: float, jitter_fs: float, tau1_fs: float, tau2_fs: float) -> float:
    """Jitter-averaged two-photon overlap ``|<f1|f2>|^2`` of Gaussian wavepackets.

    For intensity standard deviations s1, s2 and fixed delay d the squared
    overlap is ``2 s1 s2 / S * exp(-d^2 / (2 S))`` with ``S = s1^2 + s2^2``.
    Averaging over ``d ~ N(delay, jitter^2)`` gives::

        2 s1 s2 / S * sqrt(S / (S + j^2)) * exp(-delay^2 / (2 (S + j^2)))
    """
    if tau1_fs <= 0 or tau2_fs <= 0:
        raise ValueError("coherence times must be positive")
    if jitter_fs < 0:
        raise ValueError("jitter must be non-negative")
    s1 = tau1_fs / FWHM_PER_SIGMA
    s2 = tau2_fs / FWHM_PER_SIGMA
    S = s1 * s1 + s2 * s2
    total = S + jitter_fs * jitter_fs
    value = (2 * s1 * s2 / S) * math.sqrt(S / total) * math.exp(-(delay_fs**2) / (2 * total))
    return min(1.0, max(0.0, value))


def bsm_mode_overlap(source_a: SourceParams, source_b: SourceParams, timing: TimingParams) -> float:
    """Overlap of the two photons meeting at the BSM beam splitter."""
    return mode_overlap(
        timing.static_delay_fs,
        timing.sync_jitter_fs,
        source_a.bsm_coherence_time_fs,
        source_b.bsm_coherence_time_fs,
    )


def emission_sample(params: SourceParams, rng: np.random.Generator) -> DensityMatrix | None:
    """One pump pulse: the emitted pair state, or None."""
    if rng.random() < params.pair_probability:
        return emit_state(params)
    return None
