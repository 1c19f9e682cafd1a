"""Event-level Monte Carlo of the swapping experiment.

Every pump pulse is one coincidence window. Per pulse the two sources emit
(or not), the photons land on detectors according to the exact outcome
distribution of the model, threshold detectors fire with efficiency ``eta``,
and dark counts are added independently per detector.

Detector layout (CHSH mode), by column index::

    0 Q1H  1 Q1V  2 Q2H  3 Q2V   BSM behind the beam splitter + PBSs
    4 D1+  5 D1-                 analyzer of photon 1
    6 D4+  7 D4-                 analyzer of photon 4

In HOM mode the BSM polarizing splitters are ignored (one detector per
beam-splitter output) and photons 1 and 4 pass fixed polarizers in front of
a single detector each.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.optimize import least_squares

from .bsm import DETECTORS, BsmModel, Signature, bsm_signature_map, conditional_14, landing_operators
from .chsh import AngleSettings, ChshResult, Variant, chsh_from_counts, normalize_fourfolds
from .qcore import analyzer_projector, embed_operator, tensor
from .sources import SourceParams, TimingParams, bsm_mode_overlap, emit_state, mode_overlap

log = logging.getLogger(__name__)

N_DETECTORS = 8
ARM_1 = (4, 5)
ARM_4 = (6, 7)
OUTCOMES = (1, -1)
SIGNATURES = (Signature.PSI_MINUS, Signature.PSI_PLUS)
DEFAULT_CHUNK = 1 << 17

# four-bit BSM click code -> 0 psi-, 1 psi+, 2 none
_SIG_LOOKUP = np.full(16, 2, dtype=np.int8)
for _code in range(16):
    _fired = {DETECTORS[i] for i in range(4) if _code >> i & 1}
    _sig = bsm_signature_map(_fired)
    if _sig is not Signature.NONE:
        _SIG_LOOKUP[_code] = SIGNATURES.index(_sig)
# two-bit analyzer code -> 0 for +1, 1 for -1, 2 invalid (none or both fired)
_ARM_LOOKUP = np.array([2, 0, 1, 2], dtype=np.int8)


class FitError(RuntimeError):
    """Least-squares fit did not converge or the data are degenerate."""


@dataclass(frozen=True)
class RunConfig:
    """Everything that defines a simulated run; ``n_pulses`` is per setting pair."""

    n_pulses: int
    source_a: SourceParams = field(default_factory=SourceParams)
    source_b: SourceParams = field(default_factory=SourceParams)
    timing: TimingParams = field(default_factory=TimingParams)
    detection_efficiency: float = 1.0
    dark_count_prob: float = 0.0
    coincidence_window_ns: float = 2.0
    rng_seed: int = 0
    settings: AngleSettings = field(default_factory=AngleSettings)
    v_mode: float | None = None  # overrides the overlap computed from timing
    hom_polarizer_deg: float = 0.0

    def __post_init__(self) -> None:
        if self.n_pulses < 0:
            raise ValueError("n_pulses must be non-negative")
        for name in ("detection_efficiency", "dark_count_prob"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")
        if not 0 < self.coincidence_window_ns < self.timing.pulse_period_ns:
            raise ValueError(
                "coincidence window must be positive and shorter than the pulse period "
                f"({self.coincidence_window_ns} ns vs {self.timing.pulse_period_ns} ns)"
            )
        if not 0 <= self.rng_seed < 2**64:
            raise ValueError("rng_seed must be a 64-bit unsigned integer")
        if self.v_mode is not None and not 0.0 <= self.v_mode <= 1.0:
            raise ValueError("v_mode must lie in [0, 1]")

    @property
    def mode_overlap(self) -> float:
        if self.v_mode is not None:
            return self.v_mode
        return bsm_mode_overlap(self.source_a, self.source_b, self.timing)

    def bsm_model(self) -> BsmModel:
        return BsmModel(self.mode_overlap, self.detection_efficiency)


# ---------------------------------------------------------------------------
# exact photon-level outcome tables


@dataclass(frozen=True)
class OutcomeTable:
    """Conditional photon outcomes for one emission case.

    ``probs[k]`` is the probability of outcome ``k`` given the case and
    ``photons[k]`` the number of photons reaching each detector.
    """

    probs: np.ndarray
    photons: np.ndarray


def _single_pair_table(rho: np.ndarray, analyzer_qubit: int, angle: float) -> OutcomeTable:
    """One pair only: analyzer outcome for one photon, random BSM port for the other."""
    bsm_qubit = 1 - analyzer_qubit
    arm = ARM_1 if analyzer_qubit == 0 else ARM_4
    probs, photons = [], []
    for o_idx, outcome in enumerate(OUTCOMES):
        A = embed_operator(analyzer_projector(angle, outcome), [analyzer_qubit], 2)
        for pol_idx, pol in enumerate("HV"):
            proj = np.zeros((2, 2))
            proj[pol_idx, pol_idx] = 1.0
            P = A @ embed_operator(proj, [bsm_qubit], 2)
            p = float(np.trace(P @ rho).real)
            for port in "12":
                counts = np.zeros(N_DETECTORS, dtype=np.int8)
                counts[arm[o_idx]] = 1
                counts[DETECTORS.index(f"Q{port}{pol}")] = 1
                probs.append(0.5 * p)
                photons.append(counts)
    return OutcomeTable(_clean(probs), np.array(photons))


def _both_pairs_table(rho1234: np.ndarray, v_mode: float, a: float, b: float) -> OutcomeTable:
    probs, photons = [], []
    projs_a = [analyzer_projector(a, o) for o in OUTCOMES]
    projs_b = [analyzer_projector(b, o) for o in OUTCOMES]
    for landing, element in landing_operators(v_mode).items():
        sub = conditional_14(rho1234, element)
        for ia in range(2):
            for ib in range(2):
                p = float(np.trace(np.kron(projs_a[ia], projs_b[ib]) @ sub).real)
                counts = np.zeros(N_DETECTORS, dtype=np.int8)
                for det in landing:
                    counts[DETECTORS.index(det)] += 1
                counts[ARM_1[ia]] = 1
                counts[ARM_4[ib]] = 1
                probs.append(p)
                photons.append(counts)
    return OutcomeTable(_clean(probs), np.array(photons))


def _clean(probs: Sequence[float]) -> np.ndarray:
    p = np.clip(np.asarray(probs, dtype=float), 0.0, None)
    return p / p.sum()


@dataclass(frozen=True)
class PulseModel:
    """Per-pulse outcome distribution for one analyzer setting pair."""

    p_a: float
    p_b: float
    both: OutcomeTable
    only_a: OutcomeTable
    only_b: OutcomeTable


def pulse_model(config: RunConfig, a: float, b: float, v_mode: float | None = None) -> PulseModel:
    v = config.mode_overlap if v_mode is None else v_mode
    rho12 = emit_state(config.source_a)
    rho34 = emit_state(config.source_b)
    rho = tensor(rho12, rho34).matrix
    return PulseModel(
        config.source_a.pair_probability,
        config.source_b.pair_probability,
        _both_pairs_table(rho, v, a, b),
        _single_pair_table(rho12.matrix, 0, a),
        _single_pair_table(rho34.matrix, 1, b),
    )


def hom_layout(photons: np.ndarray) -> np.ndarray:
    """Map CHSH-layout photon counts to (BS out 1, BS out 2, D1, D4).

    Photons on the blocked analyzer ports (D1-, D4-) are discarded.
    """
    photons = np.asarray(photons)
    out = np.empty(photons.shape[:-1] + (4,), dtype=photons.dtype)
    out[..., 0] = photons[..., 0] + photons[..., 1]
    out[..., 1] = photons[..., 2] + photons[..., 3]
    out[..., 2] = photons[..., 4]
    out[..., 3] = photons[..., 6]
    return out


# ---------------------------------------------------------------------------
# counts containers


@dataclass(frozen=True)
class CountsTable:
    """Four-fold and two-fold counts for the four analyzer setting pairs.

    Array axes: signature (psi-, psi+), setting pair in CHSH order, outcome of
    photon 1 (+1, -1), outcome of photon 4 (+1, -1). Two-fold counts are
    stored per measurement with the same shape, so externally recorded data
    with per-measurement two-folds fit the same container.
    """

    settings: AngleSettings
    fourfold: np.ndarray
    twofold_1: np.ndarray
    twofold_4: np.ndarray
    pulses: np.ndarray

    SHAPE = (2, 4, 2, 2)

    def __post_init__(self) -> None:
        for name in ("fourfold", "twofold_1", "twofold_4"):
            arr = np.asarray(getattr(self, name), dtype=np.int64)
            if arr.shape != self.SHAPE:
                raise ValueError(f"{name} must have shape {self.SHAPE}, got {arr.shape}")
            if (arr < 0).any():
                raise ValueError(f"{name} has negative counts")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        pulses = np.asarray(self.pulses, dtype=np.int64).reshape(4)
        pulses.setflags(write=False)
        object.__setattr__(self, "pulses", pulses)

    @classmethod
    def empty(cls, settings: AngleSettings) -> "CountsTable":
        z = np.zeros(cls.SHAPE, dtype=np.int64)
        return cls(settings, z, z, z, np.zeros(4, dtype=np.int64))

    def merge(self, other: "CountsTable") -> "CountsTable":
        if other.settings != self.settings:
            raise ValueError("cannot merge tables recorded at different settings")
        return CountsTable(
            self.settings,
            self.fourfold + other.fourfold,
            self.twofold_1 + other.twofold_1,
            self.twofold_4 + other.twofold_4,
            self.pulses + other.pulses,
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CountsTable):
            return NotImplemented
        return self.settings == other.settings and all(
            np.array_equal(getattr(self, n), getattr(other, n))
            for n in ("fourfold", "twofold_1", "twofold_4", "pulses")
        )

    __hash__ = None  # type: ignore[assignment]

    def quadruples(self, signature: Signature, normalized: bool = False) -> np.ndarray:
        """(4, 4) array of (N++, N+-, N-+, N--) per setting pair."""
        s = SIGNATURES.index(Signature(signature))
        counts = self.fourfold[s].astype(float)
        if normalized:
            counts = normalize_fourfolds(counts, self.twofold_1[s], self.twofold_4[s])
        return counts.reshape(4, 4)

    def chsh(self, signature: Signature, normalized: bool = False) -> ChshResult:
        return chsh_from_counts(
            Variant.for_signature(signature), self.quadruples(signature, normalized)
        )

    def total_fourfolds(self, signature: Signature) -> int:
        return int(self.fourfold[SIGNATURES.index(Signature(signature))].sum())


# ---------------------------------------------------------------------------
# sampling


def _stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def _chunks(n: int, size: int) -> list[tuple[int, int]]:
    return [(j, min(size, n - j * size)) for j in range((n + size - 1) // size)]


def _sample_photons(model: PulseModel, n: int, rng: np.random.Generator) -> np.ndarray:
    emit_a = rng.random(n) < model.p_a
    emit_b = rng.random(n) < model.p_b
    photons = np.zeros((n, N_DETECTORS), dtype=np.int8)
    for mask, table in (
        (emit_a & emit_b, model.both),
        (emit_a & ~emit_b, model.only_a),
        (~emit_a & emit_b, model.only_b),
    ):
        m = int(mask.sum())
        if m:
            idx = rng.choice(table.probs.size, size=m, p=table.probs)
            photons[mask] = table.photons[idx]
    return photons


def _clicks(photons: np.ndarray, eta: float, dark: float, rng: np.random.Generator) -> np.ndarray:
    p_click = 1.0 - (1.0 - eta) ** photons
    clicks = rng.random(photons.shape) < p_click
    if dark > 0:
        clicks |= rng.random(photons.shape) < dark
    return clicks


def _tally_chsh(clicks: np.ndarray) -> tuple[np.ndarray, int, int]:
    code = clicks[:, 0] + 2 * clicks[:, 1] + 4 * clicks[:, 2] + 8 * clicks[:, 3]
    sig = _SIG_LOOKUP[code.astype(np.int64)]
    o1 = _ARM_LOOKUP[(clicks[:, 4] + 2 * clicks[:, 5]).astype(np.int64)]
    o4 = _ARM_LOOKUP[(clicks[:, 6] + 2 * clicks[:, 7]).astype(np.int64)]
    valid = (sig < 2) & (o1 < 2) & (o4 < 2)
    flat = sig[valid].astype(np.int64) * 4 + o1[valid] * 2 + o4[valid]
    four = np.bincount(flat, minlength=8).reshape(2, 2, 2)
    any_bsm = clicks[:, :4].any(axis=1)
    two_1 = int((any_bsm & clicks[:, 4:6].any(axis=1)).sum())
    two_4 = int((any_bsm & clicks[:, 6:8].any(axis=1)).sum())
    return four, two_1, two_4


def _run_chunk(config: RunConfig, model: PulseModel, pair: int, chunk: int, n: int):
    rng = _stream(config.rng_seed, 0, pair, chunk)
    photons = _sample_photons(model, n, rng)
    clicks = _clicks(photons, config.detection_efficiency, config.dark_count_prob, rng)
    return pair, _tally_chsh(clicks), n


def simulate_run(config: RunConfig, workers: int = 1, chunk_size: int = DEFAULT_CHUNK) -> CountsTable:
    """Simulate ``config.n_pulses`` pulses at each of the four setting pairs.

    Every (setting pair, chunk) gets its own stream derived from the seed, so
    the result is identical for any ``workers``.
    """
    models = [pulse_model(config, a, b) for a, b in config.settings.pairs()]
    jobs = [
        (pair, j, n)
        for pair in range(4)
        for j, n in _chunks(config.n_pulses, chunk_size)
    ]
    four = np.zeros(CountsTable.SHAPE, dtype=np.int64)
    two_1 = np.zeros(4, dtype=np.int64)
    two_4 = np.zeros(4, dtype=np.int64)
    pulses = np.zeros(4, dtype=np.int64)

    def run(job):
        pair, j, n = job
        return _run_chunk(config, models[pair], pair, j, n)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(job) for job in jobs]
    for pair, (f, t1, t4), n in results:
        four[:, pair] += f
        two_1[pair] += t1
        two_4[pair] += t4
        pulses[pair] += n
    shape = CountsTable.SHAPE
    return CountsTable(
        config.settings,
        four,
        np.broadcast_to(two_1[None, :, None, None], shape),
        np.broadcast_to(two_4[None, :, None, None], shape),
        pulses,
    )


def simulated_chsh(table: CountsTable, normalized: bool = False) -> dict[Signature, ChshResult]:
    return {sig: table.chsh(sig, normalized) for sig in SIGNATURES}


# ---------------------------------------------------------------------------
# exact expected rates


def _channel_rates(photons: np.ndarray, required: np.ndarray, eta: float, dark: float):
    """Probability that exactly the ``required`` detectors fire.

    Returns (total, genuine) where genuine additionally demands that every
    firing detector was hit by a detected photon.
    """
    miss = (1.0 - eta) ** photons
    p_none = miss * (1.0 - dark)
    p_fire = 1.0 - p_none
    p_photon = 1.0 - miss
    total = np.where(required, p_fire, p_none).prod(axis=-1)
    genuine = np.where(required, p_photon, p_none).prod(axis=-1)
    return total, genuine


def _chsh_channels() -> list[tuple[int, int, int, np.ndarray]]:
    channels = []
    for pattern, sig in (
        (("Q1H", "Q2V"), 0), (("Q1V", "Q2H"), 0), (("Q1H", "Q1V"), 1), (("Q2H", "Q2V"), 1)
    ):
        for ia in range(2):
            for ib in range(2):
                req = np.zeros(N_DETECTORS, dtype=bool)
                for det in pattern:
                    req[DETECTORS.index(det)] = True
                req[ARM_1[ia]] = True
                req[ARM_4[ib]] = True
                channels.append((sig, ia, ib, req))
    return channels


def _cases(model: PulseModel):
    pa, pb = model.p_a, model.p_b
    empty = OutcomeTable(np.ones(1), np.zeros((1, N_DETECTORS), dtype=np.int8))
    return (
        (pa * pb, model.both),
        (pa * (1 - pb), model.only_a),
        ((1 - pa) * pb, model.only_b),
        ((1 - pa) * (1 - pb), empty),
    )


def expected_fourfold_rates(config: RunConfig) -> tuple[np.ndarray, np.ndarray]:
    """Exact per-pulse four-fold probabilities, shape ``CountsTable.SHAPE``.

    Returns ``(total, accidental)``; accidental events contain at least one
    firing detector that received no detected photon.
    """
    eta, dark = config.detection_efficiency, config.dark_count_prob
    total = np.zeros(CountsTable.SHAPE)
    accidental = np.zeros(CountsTable.SHAPE)
    channels = _chsh_channels()
    for pair, (a, b) in enumerate(config.settings.pairs()):
        model = pulse_model(config, a, b)
        for weight, table in _cases(model):
            if weight == 0:
                continue
            for sig, ia, ib, req in channels:
                t, g = _channel_rates(table.photons, req, eta, dark)
                total[sig, pair, ia, ib] += weight * float(table.probs @ t)
                accidental[sig, pair, ia, ib] += weight * float(table.probs @ (t - g))
    return total, accidental


def accidental_rate(config: RunConfig) -> float:
    """Expected accidental four-folds per window, summed over all 16 channels
    (4 BSM click pairs x 4 analyzer outcome pairs) and averaged over the
    four setting pairs."""
    _, acc = expected_fourfold_rates(config)
    return float(acc.sum() / 4)


# ---------------------------------------------------------------------------
# HOM scan


@dataclass(frozen=True)
class GaussianFit:
    """``y = baseline * (1 - visibility * exp(-(x - center)^2 / (2 width^2)))``."""

    baseline: float
    visibility: float
    center: float
    width: float
    errors: tuple[float, float, float, float]
    chi2_reduced: float
    n_points: int

    @property
    def depth(self) -> float:
        return self.baseline * self.visibility

    @property
    def visibility_error(self) -> float:
        return self.errors[1]


def _dip(x, baseline, vis, center, width):
    return baseline * (1.0 - vis * np.exp(-((x - center) ** 2) / (2.0 * width**2)))


def fit_gaussian(x, y, sigma=None) -> GaussianFit:
    """Weighted least-squares fit of a Gaussian dip on a flat baseline.

    Without ``sigma`` the weights are Poissonian, ``sqrt(max(y, 1))``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or x.size < 5:
        raise FitError("need at least 5 matching (x, y) points")
    if not (np.isfinite(x).all() and np.isfinite(y).all()):
        raise FitError("data contain non-finite values")
    sigma = np.sqrt(np.maximum(y, 1.0)) if sigma is None else np.asarray(sigma, dtype=float)
    if sigma.shape != y.shape or (sigma <= 0).any():
        raise FitError("sigma must be positive and match y")
    span = float(x.max() - x.min())
    if span <= 0:
        raise FitError("x values are degenerate")

    order = np.argsort(x)
    xs, ys = x[order], y[order]
    q = max(1, xs.size // 4)
    baseline0 = float(np.median(np.concatenate([ys[:q], ys[-q:]])))
    if baseline0 <= 0:
        baseline0 = float(ys.max())
    if baseline0 <= 0:
        raise FitError("no positive baseline in the data")
    i_min = int(np.argmin(ys))
    vis0 = float(np.clip(1.0 - ys[i_min] / baseline0, 0.0, 1.0))
    below = xs[ys < baseline0 * (1.0 - vis0 / 2.0)]
    width0 = (below.max() - below.min()) / 2.3548 if below.size >= 2 else span / 10.0
    width0 = max(width0, span / (4 * xs.size))
    p0 = [baseline0, vis0, float(xs[i_min]), width0]
    lower = [1e-12, -1.0, x.min() - span, span * 1e-4]
    upper = [np.inf, 2.0, x.max() + span, 10.0 * span]
    p0 = list(np.clip(p0, lower, [baseline0 * 1e3, 2.0, upper[2], upper[3]]))

    def resid(p):
        return (y - _dip(x, *p)) / sigma

    res = least_squares(resid, p0, bounds=(lower, upper), x_scale="jac",
                        xtol=1e-14, ftol=1e-14, gtol=1e-14, max_nfev=20000)
    if not res.success or not np.isfinite(res.x).all():
        raise FitError(f"least squares did not converge: {res.message}")
    jtj = res.jac.T @ res.jac
    cov = np.linalg.pinv(jtj, rcond=1e-12)
    errors = tuple(float(np.sqrt(max(c, 0.0))) for c in np.diag(cov))
    dof = max(1, x.size - 4)
    chi2 = float(np.sum(res.fun**2)) / dof
    b, v, c, w = (float(t) for t in res.x)
    return GaussianFit(b, v, c, abs(w), errors, chi2, int(x.size))


@dataclass(frozen=True)
class HomScanResult:
    delays_fs: np.ndarray
    fourfolds: np.ndarray
    fit: GaussianFit
    pulses_per_point: int

    @property
    def errors(self) -> np.ndarray:
        return np.sqrt(np.maximum(self.fourfolds, 1))

    @property
    def visibility(self) -> float:
        return self.fit.visibility

    @property
    def visibility_error(self) -> float:
        return self.fit.visibility_error


def hom_point_model(config: RunConfig, delay_fs: float) -> PulseModel:
    timing = replace(config.timing, static_delay_fs=float(delay_fs))
    v = mode_overlap(
        timing.static_delay_fs,
        timing.sync_jitter_fs,
        config.source_a.bsm_coherence_time_fs,
        config.source_b.bsm_coherence_time_fs,
    )
    angle = config.hom_polarizer_deg
    return pulse_model(config, angle, angle, v_mode=v)


def _hom_fourfold(clicks: np.ndarray) -> int:
    return int(clicks.all(axis=1).sum())


def hom_counts(config: RunConfig, delays_fs: Sequence[float], workers: int = 1,
               chunk_size: int = DEFAULT_CHUNK) -> np.ndarray:
    """Simulated four-fold counts (D1, D4 and both beam-splitter outputs) per delay."""
    models = [hom_point_model(config, d) for d in delays_fs]
    jobs = [(i, j, n) for i in range(len(models)) for j, n in _chunks(config.n_pulses, chunk_size)]

    def run(job):
        i, j, n = job
        rng = _stream(config.rng_seed, 1, i, j)
        photons = hom_layout(_sample_photons(models[i], n, rng))
        clicks = _clicks(photons, config.detection_efficiency, config.dark_count_prob, rng)
        return i, _hom_fourfold(clicks)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(job) for job in jobs]
    counts = np.zeros(len(models), dtype=np.int64)
    for i, c in results:
        counts[i] += c
    return counts


def expected_hom_rate(config: RunConfig, delay_fs: float) -> float:
    """Exact per-pulse probability that D1, D4 and both splitter outputs fire."""
    model = hom_point_model(config, delay_fs)
    eta, dark = config.detection_efficiency, config.dark_count_prob
    req = np.ones(4, dtype=bool)
    rate = 0.0
    for weight, table in _cases(model):
        if weight:
            t, _ = _channel_rates(hom_layout(table.photons), req, eta, dark)
            rate += weight * float(table.probs @ t)
    return rate


def hom_scan(config: RunConfig, delays_fs: Sequence[float], workers: int = 1) -> HomScanResult:
    """Simulate a delay scan and fit the dip; ``config.n_pulses`` per point."""
    delays = np.asarray(delays_fs, dtype=float)
    counts = hom_counts(config, delays, workers)
    fit = fit_gaussian(delays, counts)
    log.info("HOM fit: V=%.4f +- %.4f, chi2_red=%.2f", fit.visibility, fit.visibility_error,
             fit.chi2_reduced)
    return HomScanResult(delays, counts, fit, config.n_pulses)


def pulses_for_fourfolds(config: RunConfig, target: float) -> int:
    """Pulses per setting pair giving ``target`` expected four-folds per signature."""
    total, _ = expected_fourfold_rates(config)
    per_pulse = total.sum(axis=(1, 2, 3)).min()
    if per_pulse <= 0:
        raise ValueError("configuration yields no four-folds")
    return int(math.ceil(target / per_pulse))
