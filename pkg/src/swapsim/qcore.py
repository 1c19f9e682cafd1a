"""Exact state algebra for up to four polarization qubits.

Conventions used throughout the package:

* computational basis ``H -> 0``, ``V -> 1``;
* qubit ``k`` (0-based) is photon ``k + 1``; qubit 0 is the most significant
  bit of a basis index, so ``|HV>`` is index 1 and ``|VH>`` is index 2;
* a polarizer at angle ``theta`` transmits ``cos(theta)|H> + sin(theta)|V>``
  with outcome +1 and the orthogonal polarization with outcome -1.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

MAX_QUBITS = 4
NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
POSITIVITY_TOL = 1e-10
PROJECTOR_TOL = 1e-10
IMPOSSIBLE_TOL = 1e-12


class StateError(ValueError):
    """Raised for states or operators violating their invariants."""


class ImpossibleOutcome(ValueError):
    """A measurement outcome whose probability is numerically zero."""


class BellLabel(enum.Enum):
    PSI_PLUS = "psi+"
    PSI_MINUS = "psi-"
    PHI_PLUS = "phi+"
    PHI_MINUS = "phi-"


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=complex)
    array.setflags(write=False)
    return array


def _n_qubits_for(dim: int) -> int:
    n = int(round(np.log2(dim))) if dim > 0 else -1
    if n < 1 or n > MAX_QUBITS or 2**n != dim:
        raise StateError(f"dimension {dim} is not 2**n for n in 1..{MAX_QUBITS}")
    return n


@dataclass(frozen=True)
class PureState:
    """Normalized ket over the computational basis."""

    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = _frozen(np.ravel(self.amplitudes))
        _n_qubits_for(amps.size)
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise StateError(f"squared norm {norm!r} differs from 1")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def n_qubits(self) -> int:
        return _n_qubits_for(self.amplitudes.size)

    def density(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()))

    def inner(self, other: "PureState") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True)
class DensityMatrix:
    """Trace-one positive Hermitian operator on 1..4 qubits.

    Construction validates all invariants; instances are read-only.
    """

    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = _frozen(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise StateError(f"density matrix must be square, got shape {m.shape}")
        _n_qubits_for(m.shape[0])
        if np.max(np.abs(m - m.conj().T)) > HERMITIAN_TOL:
            raise StateError("matrix is not Hermitian")
        tr = np.trace(m).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise StateError(f"trace {tr!r} differs from 1")
        if np.min(np.linalg.eigvalsh(m)) < -POSITIVITY_TOL:
            raise StateError("matrix has a negative eigenvalue")
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_unnormalized(cls, matrix: np.ndarray) -> "DensityMatrix":
        """Symmetrize and renormalize roundoff-level deviations away."""
        m = np.asarray(matrix, dtype=complex)
        m = 0.5 * (m + m.conj().T)
        return cls(m / np.trace(m).real)

    @classmethod
    def maximally_mixed(cls, n_qubits: int) -> "DensityMatrix":
        dim = 2**n_qubits
        return cls(np.eye(dim) / dim)

    @classmethod
    def basis(cls, label: str) -> "DensityMatrix":
        """Projector onto a product basis state, e.g. ``"HV"``."""
        return basis_state(label).density()

    @property
    def n_qubits(self) -> int:
        return _n_qubits_for(self.matrix.shape[0])

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def purity(self) -> float:
        return float(np.trace(self.matrix @ self.matrix).real)

    def fidelity(self, pure: PureState) -> float:
        """Overlap <psi|rho|psi> with a pure state."""
        v = pure.amplitudes
        return float(np.vdot(v, self.matrix @ v).real)

    def allclose(self, other: "DensityMatrix", atol: float = 1e-12) -> bool:
        return self.dim == other.dim and bool(
            np.allclose(self.matrix, other.matrix, rtol=0.0, atol=atol)
        )


def validate(rho: DensityMatrix) -> None:
    """Re-check the invariants of an existing state; raises StateError."""
    DensityMatrix(np.array(rho.matrix))


@dataclass(frozen=True)
class PolarizerSetting:
    """Linear-polarization analyzer orientation in degrees, kept in [0, 180)."""

    angle: float

    def __post_init__(self) -> None:
        angle = float(self.angle) % 180.0
        if angle >= 180.0:  # -tiny % 180 rounds up to 180.0
            angle = 0.0
        object.__setattr__(self, "angle", angle)

    @property
    def radians(self) -> float:
        return np.deg2rad(self.angle)


def as_setting(value: "PolarizerSetting | float") -> PolarizerSetting:
    return value if isinstance(value, PolarizerSetting) else PolarizerSetting(value)


def basis_state(label: str) -> PureState:
    """Product state from a string of ``H``/``V`` characters."""
    vec = np.ones(1, dtype=complex)
    for ch in label.upper():
        if ch not in "HV":
            raise StateError(f"unknown polarization {ch!r} in {label!r}")
        vec = np.kron(vec, [1.0, 0.0] if ch == "H" else [0.0, 1.0])
    return PureState(vec)


def _fix_global_phase(vec: np.ndarray) -> np.ndarray:
    idx = np.flatnonzero(np.abs(vec) > 1e-15)[0]
    return vec * (abs(vec[idx]) / vec[idx])


def bell_state(label: BellLabel) -> PureState:
    """One of the four maximally entangled two-photon polarization states."""
    s = 1 / np.sqrt(2)
    amps = {
        BellLabel.PHI_PLUS: [s, 0, 0, s],
        BellLabel.PSI_PLUS: [0, s, s, 0],
        BellLabel.PSI_MINUS: [0, s, -s, 0],
        BellLabel.PHI_MINUS: [s, 0, 0, -s],
    }[BellLabel(label)]
    return PureState(_fix_global_phase(np.array(amps, dtype=complex)))


def tensor(a: DensityMatrix, b: DensityMatrix) -> DensityMatrix:
    if a.n_qubits + b.n_qubits > MAX_QUBITS:
        raise StateError(
            f"tensor product of {a.n_qubits} and {b.n_qubits} qubits exceeds {MAX_QUBITS}"
        )
    return DensityMatrix.from_unnormalized(np.kron(a.matrix, b.matrix))


def _check_qubits(qubits: Iterable[int], n: int, what: str) -> list[int]:
    qs = [int(q) for q in qubits]
    if not qs:
        raise StateError(f"{what} must be nonempty")
    if len(set(qs)) != len(qs) or any(q < 0 or q >= n for q in qs):
        raise StateError(f"invalid {what} {qs} for {n} qubits")
    return qs


def partial_trace(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    """Reduced state on the qubits in ``keep`` (returned in ascending order)."""
    n = rho.n_qubits
    kept = sorted(_check_qubits(keep, n, "keep set"))
    return DensityMatrix.from_unnormalized(
        reduce_operator(rho.matrix, kept, n)
    )


def reduce_operator(op: np.ndarray, keep: Sequence[int], n: int) -> np.ndarray:
    """Partial trace of an arbitrary operator; no normalization."""
    t = np.asarray(op).reshape((2,) * (2 * n))
    row = list(range(n))
    col = [n + q if q in keep else q for q in range(n)]
    out = [q for q in keep] + [n + q for q in keep]
    k = len(keep)
    return np.einsum(t, row + col, out).reshape(2**k, 2**k)


def embed_operator(op: np.ndarray, targets: Sequence[int], n: int) -> np.ndarray:
    """Lift an operator on ``targets`` (in the given order) to all ``n`` qubits."""
    targets = list(targets)
    k = len(targets)
    op = np.asarray(op, dtype=complex)
    if op.shape != (2**k, 2**k):
        raise StateError(f"operator shape {op.shape} does not act on {k} qubits")
    rest = [q for q in range(n) if q not in targets]
    full = np.kron(op, np.eye(2 ** len(rest)))
    # full acts on qubit order targets + rest; permute back to 0..n-1
    order = targets + rest
    perm = [order.index(q) for q in range(n)]
    t = full.reshape((2,) * (2 * n))
    t = t.transpose(perm + [n + p for p in perm])
    return t.reshape(2**n, 2**n)


def apply_projector(
    rho: DensityMatrix, projector: np.ndarray, qubits: Sequence[int] | None = None
) -> tuple[float, DensityMatrix]:
    """Project ``rho`` and return ``(probability, conditional state)``.

    ``qubits`` names the qubits the projector acts on (default: all of them).
    Raises ImpossibleOutcome when the probability is below 1e-12.
    """
    n = rho.n_qubits
    qs = list(range(n)) if qubits is None else _check_qubits(qubits, n, "projector qubits")
    p_small = np.asarray(projector, dtype=complex)
    if (
        np.max(np.abs(p_small - p_small.conj().T)) > PROJECTOR_TOL
        or np.max(np.abs(p_small @ p_small - p_small)) > PROJECTOR_TOL
    ):
        raise StateError("operator is not an orthogonal projector")
    P = embed_operator(p_small, qs, n)
    post = P @ rho.matrix @ P
    prob = float(np.trace(post).real)
    if prob < IMPOSSIBLE_TOL:
        raise ImpossibleOutcome(f"outcome impossible (probability {prob:.3g})")
    return prob, DensityMatrix.from_unnormalized(post)


def analyzer_projector(setting: PolarizerSetting | float, outcome: int) -> np.ndarray:
    """Projector for analyzer outcome +1 (along angle) or -1 (orthogonal)."""
    theta = as_setting(setting).radians
    if outcome == -1:
        theta += np.pi / 2
    elif outcome != 1:
        raise ValueError(f"outcome must be +1 or -1, got {outcome}")
    v = np.array([np.cos(theta), np.sin(theta)])
    return np.outer(v, v).astype(complex)


def polarization_observable(setting: PolarizerSetting | float) -> np.ndarray:
    """The +/-1 valued observable ``cos 2t Z + sin 2t X``."""
    two_theta = 2 * as_setting(setting).radians
    c, s = np.cos(two_theta), np.sin(two_theta)
    return np.array([[c, s], [s, -c]], dtype=complex)


def correlation(
    rho: DensityMatrix, a: PolarizerSetting | float, b: PolarizerSetting | float
) -> float:
    """Expectation of the product of the two analyzer outcomes."""
    if rho.n_qubits != 2:
        raise StateError("correlation needs a two-qubit state")
    obs = np.kron(polarization_observable(a), polarization_observable(b))
    return float(np.clip(np.trace(rho.matrix @ obs).real, -1.0, 1.0))
