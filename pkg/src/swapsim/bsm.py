"""Linear-optics Bell-state measurement on photons 2 and 3.

Photons 2 and 3 enter a 50:50 beam splitter from opposite ports; each output
port is followed by a polarizing beam splitter, giving four threshold
detectors ``Q1H, Q1V`` (first output) and ``Q2H, Q2V`` (second output).
Partial temporal distinguishability is captured by ``v_mode``, the squared
overlap of the two photons' temporal modes.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .qcore import (
    BellLabel,
    DensityMatrix,
    ImpossibleOutcome,
    PolarizerSetting,
    bell_state,
    correlation,
    embed_operator,
    reduce_operator,
    tensor,
)

DETECTORS = ("Q1H", "Q1V", "Q2H", "Q2V")
SIGNATURE_PROB_TOL = 1e-12


class Signature(enum.Enum):
    PSI_MINUS = "psi-"
    PSI_PLUS = "psi+"
    NONE = "none"

    @property
    def bell_label(self) -> BellLabel:
        if self is Signature.NONE:
            raise ValueError("NoSignature has no Bell state")
        return BellLabel(self.value)


_SIGNATURE_PATTERNS = {
    frozenset({"Q1H", "Q2V"}): Signature.PSI_MINUS,
    frozenset({"Q1V", "Q2H"}): Signature.PSI_MINUS,
    frozenset({"Q1H", "Q1V"}): Signature.PSI_PLUS,
    frozenset({"Q2H", "Q2V"}): Signature.PSI_PLUS,
}


def bsm_signature_map(clicks: Iterable[str]) -> Signature:
    """Signature announced by the set of BSM detectors that fired in one window."""
    pattern = frozenset(clicks)
    unknown = pattern - set(DETECTORS)
    if unknown:
        raise ValueError(f"unknown detectors {sorted(unknown)}")
    return _SIGNATURE_PATTERNS.get(pattern, Signature.NONE)


@dataclass(frozen=True)
class BsmModel:
    v_mode: float = 1.0
    detection_efficiency: float = 1.0

    def __post_init__(self) -> None:
        for name in ("v_mode", "detection_efficiency"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")


@dataclass(frozen=True)
class BsmOutcome:
    signature: Signature
    probability: float
    conditional_14: DensityMatrix | None = None


def _proj(label: str) -> np.ndarray:
    idx = {"HH": 0, "HV": 1, "VH": 2, "VV": 3}[label]
    out = np.zeros((4, 4), dtype=complex)
    out[idx, idx] = 1.0
    return out


# classical routing of distinguishable photons: HV or VH pairs announce
# either signature with probability 1/2 each
DISTINGUISHABLE_TERM = 0.5 * (_proj("HV") + _proj("VH"))


def signature_operator(signature: Signature, v_mode: float) -> np.ndarray:
    """POVM element on photons (2, 3) for a signature.

    ``v_mode |s><s| + (1 - v_mode) D`` for the two announced signatures; the
    remainder of the identity for NoSignature.
    """
    if signature is Signature.NONE:
        return _proj("HH") + _proj("VV")
    bell = bell_state(signature.bell_label).density().matrix
    return v_mode * bell + (1 - v_mode) * DISTINGUISHABLE_TERM


def landing_operators(v_mode: float) -> dict[tuple[str, str], np.ndarray]:
    """POVM elements for every way two photons can land on the four detectors.

    Keys are sorted detector-name pairs; a repeated name means both photons
    reached the same detector. The ten elements sum to the identity.
    """
    half_minus = 0.5 * signature_operator(Signature.PSI_MINUS, v_mode)
    half_plus = 0.5 * signature_operator(Signature.PSI_PLUS, v_mode)
    bunch = 0.25 * (1 + v_mode)
    split = 0.5 * (1 - v_mode)
    ops = {
        ("Q1H", "Q2V"): half_minus,
        ("Q1V", "Q2H"): half_minus,
        ("Q1H", "Q1V"): half_plus,
        ("Q2H", "Q2V"): half_plus,
    }
    for pol in "HV":
        P = _proj(pol * 2)
        ops[(f"Q1{pol}", f"Q1{pol}")] = bunch * P
        ops[(f"Q2{pol}", f"Q2{pol}")] = bunch * P
        ops[(f"Q1{pol}", f"Q2{pol}")] = split * P
    return ops


def _joint(rho12: DensityMatrix, rho34: DensityMatrix) -> DensityMatrix:
    if rho12.n_qubits != 2 or rho34.n_qubits != 2:
        raise ValueError("swap needs two two-qubit states")
    return tensor(rho12, rho34)


def conditional_14(rho1234: np.ndarray, element: np.ndarray) -> np.ndarray:
    """Unnormalized state of photons 1 and 4 after ``element`` acts on 2 and 3."""
    full = embed_operator(element, [1, 2], 4)
    return reduce_operator(full @ rho1234, [0, 3], 4)


def swap(rho12: DensityMatrix, rho34: DensityMatrix, model: BsmModel) -> list[BsmOutcome]:
    """Outcomes of the BSM in the order psi-, psi+, NoSignature.

    Photons 1 and 4 are left in the returned conditional state for each
    announced signature.
    """
    rho = _joint(rho12, rho34).matrix
    outcomes = []
    for sig in (Signature.PSI_MINUS, Signature.PSI_PLUS):
        sub = conditional_14(rho, signature_operator(sig, model.v_mode))
        outcomes.append((sig, float(np.trace(sub).real), sub))
    if all(p < SIGNATURE_PROB_TOL for _, p, _ in outcomes):
        return [
            BsmOutcome(Signature.PSI_MINUS, 0.0),
            BsmOutcome(Signature.PSI_PLUS, 0.0),
            BsmOutcome(Signature.NONE, 1.0),
        ]
    result = [
        BsmOutcome(sig, p, DensityMatrix.from_unnormalized(sub) if p >= SIGNATURE_PROB_TOL else None)
        for sig, p, sub in outcomes
    ]
    p_none = max(0.0, 1.0 - sum(o.probability for o in result))
    result.append(BsmOutcome(Signature.NONE, p_none))
    return result


def swapped_state(
    rho12: DensityMatrix, rho34: DensityMatrix, model: BsmModel, signature: Signature
) -> DensityMatrix:
    """Conditional state of photons 1 and 4 for an announced signature."""
    signature = Signature(signature)
    if signature is Signature.NONE:
        raise ValueError("NoSignature leaves no heralded state")
    for outcome in swap(rho12, rho34, model):
        if outcome.signature is signature:
            if outcome.conditional_14 is None:
                raise ImpossibleOutcome(f"signature {signature.value} has zero probability")
            return outcome.conditional_14
    raise AssertionError("unreachable")


def swapped_correlation(
    rho12: DensityMatrix,
    rho34: DensityMatrix,
    model: BsmModel,
    signature: Signature,
    a: PolarizerSetting | float,
    b: PolarizerSetting | float,
) -> float:
    return correlation(swapped_state(rho12, rho34, model, signature), a, b)
