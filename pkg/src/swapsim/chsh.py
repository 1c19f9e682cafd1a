"""CHSH evaluation for the two announced Bell states, from correlations or counts."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .bsm import BsmModel, Signature, swapped_state
from .qcore import DensityMatrix, correlation


class NoDataError(ValueError):
    """Raised when an estimate is requested from zero events."""


class Variant(enum.Enum):
    FOR_PSI_MINUS = "psi-"
    FOR_PSI_PLUS = "psi+"

    @classmethod
    def for_signature(cls, signature: Signature) -> "Variant":
        return cls(Signature(signature).value)

    @property
    def signs(self) -> tuple[int, int, int, int]:
        """Coefficients of E(a1,b1), E(a1,b2), E(a2,b1), E(a2,b2)."""
        if self is Variant.FOR_PSI_MINUS:
            return (1, -1, 1, 1)
        return (-1, 1, 1, 1)


@dataclass(frozen=True)
class AngleSettings:
    a1: float = 0.0
    a2: float = 45.0
    b1: float = 22.5
    b2: float = 67.5

    def __post_init__(self) -> None:
        if len(set(self.pairs())) != 4:
            raise ValueError("analyzer settings must give four distinct pairs")

    def pairs(self) -> list[tuple[float, float]]:
        """Setting pairs in CHSH order (a1,b1), (a1,b2), (a2,b1), (a2,b2)."""
        return [(self.a1, self.b1), (self.a1, self.b2), (self.a2, self.b1), (self.a2, self.b2)]


@dataclass(frozen=True)
class CorrelationEstimate:
    E: float
    std_error: float = 0.0
    counts: tuple[int, int, int, int] | None = None  # N++, N+-, N-+, N--

    def __post_init__(self) -> None:
        if not -1.0 - 1e-12 <= self.E <= 1.0 + 1e-12:
            raise ValueError(f"correlation {self.E} outside [-1, 1]")
        if self.std_error < 0:
            raise ValueError("std_error must be non-negative")


@dataclass(frozen=True)
class ChshResult:
    variant: Variant
    S: float
    std_error: float
    estimates: tuple[CorrelationEstimate, ...] = field(default=())

    @property
    def significance(self) -> float:
        return violation_significance(self)


def _as_estimate(value: CorrelationEstimate | float) -> CorrelationEstimate:
    if isinstance(value, CorrelationEstimate):
        return value
    return CorrelationEstimate(float(value))


def chsh_S(
    variant: Variant,
    E11: CorrelationEstimate | float,
    E12: CorrelationEstimate | float,
    E21: CorrelationEstimate | float,
    E22: CorrelationEstimate | float,
) -> ChshResult:
    """``S = |+-E11 -+ E12 + E21 + E22|``, upper signs for psi-.

    Errors of the four correlations are added in quadrature.
    """
    variant = Variant(variant)
    ests = tuple(_as_estimate(e) for e in (E11, E12, E21, E22))
    S = abs(sum(s * e.E for s, e in zip(variant.signs, ests)))
    err = math.sqrt(sum(e.std_error**2 for e in ests))
    return ChshResult(variant, S, err, ests)


def estimate_from_counts(counts: Sequence[float]) -> CorrelationEstimate:
    """Correlation from ``(N++, N+-, N-+, N--)`` with Poisson error.

    First-order propagation with independent Poisson counts reduces to
    ``sqrt((1 - E^2) / N)``.
    """
    npp, npm, nmp, nmm = (float(c) for c in counts)
    if min(npp, npm, nmp, nmm) < 0:
        raise ValueError("counts must be non-negative")
    total = npp + npm + nmp + nmm
    if total <= 0:
        raise NoDataError("no data: all four counts are zero")
    E = (npp + nmm - npm - nmp) / total
    err = math.sqrt(max(0.0, 1.0 - E * E) / total)
    as_int = tuple(int(round(c)) for c in (npp, npm, nmp, nmm))
    stored = as_int if np.allclose(as_int, (npp, npm, nmp, nmm)) else None
    return CorrelationEstimate(E, err, stored)


def chsh_from_counts(variant: Variant, counts: Sequence[Sequence[float]]) -> ChshResult:
    """CHSH from four count quadruples in :meth:`AngleSettings.pairs` order."""
    if len(counts) != 4:
        raise ValueError("need counts for exactly four setting pairs")
    return chsh_S(variant, *(estimate_from_counts(c) for c in counts))


def normalize_fourfolds(raw, twofold_1, twofold_4) -> np.ndarray:
    """Correct four-fold counts for drifting pair-collection efficiency.

    Each measurement is scaled by (mean two-fold product) / (its own product
    of the two two-fold rates), then the whole set is rescaled to keep the
    grand total of the raw counts. All arrays share one shape.
    """
    raw = np.asarray(raw, dtype=float)
    t1 = np.asarray(twofold_1, dtype=float)
    t4 = np.asarray(twofold_4, dtype=float)
    if raw.shape != t1.shape or raw.shape != t4.shape:
        raise ValueError("raw counts and two-fold rates must share a shape")
    bad = np.argwhere(~((t1 > 0) & (t4 > 0)))
    if bad.size:
        where = tuple(int(i) for i in bad[0])
        raise ValueError(f"non-positive two-fold rate at setting index {where}")
    product = t1 * t4
    scaled = raw * product.mean() / product
    total = scaled.sum()
    if total > 0:
        scaled *= raw.sum() / total
    return scaled


def violation_significance(result: ChshResult) -> float:
    """Distance of S above the local bound 2, in standard errors."""
    if not result.std_error > 0:
        raise ValueError("significance needs a positive standard error")
    return (result.S - 2.0) / result.std_error


def analytic_chsh(
    rho: DensityMatrix, variant: Variant, settings: AngleSettings = AngleSettings()
) -> ChshResult:
    """Exact S of a two-qubit state at the given settings."""
    return chsh_S(variant, *(correlation(rho, a, b) for a, b in settings.pairs()))


def swapped_chsh(
    rho12: DensityMatrix,
    rho34: DensityMatrix,
    model: BsmModel,
    signature: Signature,
    settings: AngleSettings = AngleSettings(),
) -> ChshResult:
    """Exact S of the state heralded by ``signature``, using its own variant."""
    signature = Signature(signature)
    state = swapped_state(rho12, rho34, model, signature)
    return analytic_chsh(state, Variant.for_signature(signature), settings)
