import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from swapsim.qcore import (  # noqa: E402
    HERMITIAN_TOL,
    POSITIVITY_TOL,
    TRACE_TOL,
    BellLabel,
    DensityMatrix,
    bell_state,
)


def assert_valid_density(rho: DensityMatrix) -> None:
    m = rho.matrix
    assert np.max(np.abs(m - m.conj().T)) <= HERMITIAN_TOL
    assert abs(np.trace(m).real - 1.0) <= TRACE_TOL
    assert np.min(np.linalg.eigvalsh(m)) >= -POSITIVITY_TOL


def random_density(rng: np.random.Generator, n_qubits: int = 2, rank: int | None = None) -> DensityMatrix:
    dim = 2**n_qubits
    rank = rank or dim
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    return DensityMatrix.from_unnormalized(g @ g.conj().T)


@pytest.fixture
def singlet() -> DensityMatrix:
    return bell_state(BellLabel.PSI_MINUS).density()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)
