import math
from dataclasses import replace

import numpy as np
import pytest
from scipy import stats

from swapsim.bsm import BsmModel, Signature, swap, swapped_correlation
from swapsim.chsh import AngleSettings
from swapsim.mcsim import (
    ARM_1,
    ARM_4,
    SIGNATURES,
    CountsTable,
    FitError,
    RunConfig,
    accidental_rate,
    expected_fourfold_rates,
    expected_hom_rate,
    fit_gaussian,
    hom_counts,
    hom_layout,
    hom_scan,
    pulse_model,
    pulses_for_fourfolds,
    simulate_run,
)
from swapsim.qcore import analyzer_projector
from swapsim.sources import SourceParams, TimingParams, coherence_time_fs, emit_state, mode_overlap

IDEAL = SourceParams(state_visibility=1.0, pair_probability=1.0)


def config(**kw) -> RunConfig:
    base = dict(n_pulses=20_000, source_a=IDEAL, source_b=IDEAL,
                timing=TimingParams(sync_jitter_fs=0.0), rng_seed=11)
    base.update(kw)
    return RunConfig(**base)


def oracle_distribution(src_a, src_b, v_mode, a, b):
    """P(signature, o1, o4) from bsm.swap and analyzer traces, plus the rest."""
    probs = []
    outcomes = {o.signature: o for o in swap(emit_state(src_a), emit_state(src_b), BsmModel(v_mode=v_mode))}
    for sig in SIGNATURES:
        o = outcomes[sig]
        for oa in (1, -1):
            for ob in (1, -1):
                P = np.kron(analyzer_projector(a, oa), analyzer_projector(b, ob))
                probs.append(o.probability * float(np.trace(P @ o.conditional_14.matrix).real))
    probs.append(1.0 - sum(probs))
    return np.array(probs)


class TestRunConfig:
    def test_window_shorter_than_period(self):
        with pytest.raises(ValueError, match="window"):
            config(coincidence_window_ns=13.0)

    @pytest.mark.parametrize("kw", [{"detection_efficiency": 1.5}, {"dark_count_prob": -0.1},
                                    {"rng_seed": -1}, {"rng_seed": 2**64}, {"n_pulses": -1}, {"v_mode": 2.0}])
    def test_rejects(self, kw):
        with pytest.raises(ValueError):
            config(**kw)

    def test_overlap_from_timing(self):
        cfg = config(timing=TimingParams(sync_jitter_fs=260.0))
        tau = cfg.source_a.bsm_coherence_time_fs
        assert cfg.mode_overlap == pytest.approx(mode_overlap(0, 260.0, tau, tau))
        assert config(v_mode=0.5).mode_overlap == 0.5


class TestPulseModel:
    def test_tables_normalized(self):
        m = pulse_model(config(), 0.0, 22.5)
        for t in (m.both, m.only_a, m.only_b):
            assert t.probs.sum() == pytest.approx(1.0, abs=1e-12)
            assert (t.probs >= 0).all()
        assert m.both.probs.size == 40
        assert m.only_a.probs.size == m.only_b.probs.size == 8
        # both pairs: two photons at the BSM, one per arm
        assert (m.both.photons[:, :4].sum(axis=1) == 2).all()
        assert (m.both.photons[:, list(ARM_1)].sum(axis=1) == 1).all()
        assert (m.both.photons[:, list(ARM_4)].sum(axis=1) == 1).all()

    def test_hom_layout(self):
        photons = np.array([[1, 0, 0, 1, 1, 0, 0, 1], [0, 2, 0, 0, 0, 1, 1, 0]])
        np.testing.assert_array_equal(hom_layout(photons), [[1, 1, 1, 0], [2, 0, 0, 1]])


class TestSimulateRun:
    def test_valid_signature_fraction(self):
        n = 50_000
        table = simulate_run(config(n_pulses=n))
        total = int(table.fourfold.sum())
        N = 4 * n
        sd = math.sqrt(N * 0.25)
        assert abs(total - N / 2) < 3 * sd
        for sig in SIGNATURES:
            assert abs(table.total_fourfolds(sig) - N / 4) < 3 * math.sqrt(N * 3 / 16)

    def test_no_pairs_no_fourfolds(self):
        table = simulate_run(config(source_a=replace(IDEAL, pair_probability=0.0)))
        assert table.fourfold.sum() == 0

    def test_one_source_off_only_accidentals(self):
        cfg = config(n_pulses=200_000, source_a=replace(IDEAL, pair_probability=0.0), dark_count_prob=0.02)
        total, acc = expected_fourfold_rates(cfg)
        np.testing.assert_allclose(total, acc, rtol=1e-12)
        table = simulate_run(cfg)
        expected = cfg.n_pulses * total.sum()
        assert expected > 100
        assert abs(table.fourfold.sum() - expected) < 4 * math.sqrt(expected)
        assert accidental_rate(cfg) == pytest.approx(total.sum() / 4, rel=1e-12)

    def test_reproducible(self):
        cfg = config(n_pulses=30_000, detection_efficiency=0.6, dark_count_prob=1e-3)
        assert simulate_run(cfg) == simulate_run(cfg)

    def test_worker_count_irrelevant(self):
        cfg = config(n_pulses=50_000, detection_efficiency=0.6)
        assert simulate_run(cfg, workers=1, chunk_size=8192) == simulate_run(cfg, workers=4, chunk_size=8192)

    def test_seed_matters(self):
        cfg = config(n_pulses=30_000, detection_efficiency=0.6)
        assert simulate_run(cfg) != simulate_run(replace(cfg, rng_seed=12))

    def test_outcome_frequencies_goodness_of_fit(self):
        src = replace(IDEAL, state_visibility=0.85)
        cfg = config(n_pulses=100_000, source_a=src, source_b=src, v_mode=0.8)
        table = simulate_run(cfg)
        for pair, (a, b) in enumerate(cfg.settings.pairs()):
            expected = oracle_distribution(src, src, 0.8, a, b) * cfg.n_pulses
            observed = np.append(table.fourfold[:, pair].reshape(-1), 0)
            observed[-1] = cfg.n_pulses - observed.sum()
            assert stats.chisquare(observed, expected).pvalue > 0.001

    def test_twofolds_bound_fourfolds(self):
        cfg = config(n_pulses=20_000, detection_efficiency=0.5, dark_count_prob=1e-3,
                     source_a=replace(IDEAL, pair_probability=0.3), source_b=replace(IDEAL, pair_probability=0.3))
        table = simulate_run(cfg)
        per_pair = table.fourfold.sum(axis=(0, 2, 3))
        for arr in (table.twofold_1, table.twofold_4):
            assert (arr >= per_pair[None, :, None, None]).all()
            assert (arr >= table.fourfold).all()

    def test_expected_rates_match_simulation(self):
        cfg = config(n_pulses=100_000, detection_efficiency=0.5, dark_count_prob=1e-3,
                     source_a=replace(IDEAL, pair_probability=0.5), source_b=replace(IDEAL, pair_probability=0.5))
        total, acc = expected_fourfold_rates(cfg)
        assert (acc <= total).all()
        table = simulate_run(cfg)
        mu = total * cfg.n_pulses
        z = (table.fourfold - mu) / np.sqrt(mu)
        assert stats.chisquare(table.fourfold.ravel(), mu.ravel() * table.fourfold.sum() / mu.sum()).pvalue > 1e-3
        assert np.abs(z).max() < 4.5

    def test_fitted_config_correlation(self):
        src = SourceParams(state_visibility=0.9305, pair_probability=0.5)
        cfg = RunConfig(n_pulses=60_000, source_a=src, source_b=src, detection_efficiency=0.5,
                        dark_count_prob=1e-5, v_mode=0.96, rng_seed=5)
        table = simulate_run(cfg)
        est = table.chsh(Signature.PSI_MINUS).estimates[0]
        exact = swapped_correlation(emit_state(src), emit_state(src), BsmModel(v_mode=0.96),
                                    Signature.PSI_MINUS, 0.0, 22.5)
        assert abs(est.E - exact) < 4 * est.std_error

    def test_pulses_for_fourfolds(self):
        cfg = config(detection_efficiency=0.5, source_a=replace(IDEAL, pair_probability=0.5),
                     source_b=replace(IDEAL, pair_probability=0.5))
        n = pulses_for_fourfolds(cfg, 1000)
        total, _ = expected_fourfold_rates(cfg)
        assert total[0].sum() * n >= 1000
        assert total[0].sum() * (n - 1) < 1000


class TestAccidentalRate:
    def test_nothing(self):
        cfg = config(source_a=replace(IDEAL, pair_probability=0.0), source_b=replace(IDEAL, pair_probability=0.0))
        assert accidental_rate(cfg) == 0.0

    def test_darks_only(self):
        d = 1e-5
        off = replace(IDEAL, pair_probability=0.0)
        cfg = config(source_a=off, source_b=off, dark_count_prob=d)
        _, acc = expected_fourfold_rates(cfg)
        # one channel: its four detectors fire, the other four stay silent;
        # every stored measurement collects the two click patterns of its signature
        per_channel = d**4 * (1 - d) ** 4
        np.testing.assert_allclose(acc, 2 * per_channel, rtol=1e-9)
        assert per_channel == pytest.approx(d**4, rel=1e-4)
        assert accidental_rate(cfg) == pytest.approx(16 * d**4, rel=1e-4)

    def test_ideal_has_no_accidentals(self):
        assert accidental_rate(config()) == 0.0


class TestCountsTable:
    def random_table(self, rng):
        shape = CountsTable.SHAPE
        return CountsTable(AngleSettings(), rng.integers(0, 100, shape), rng.integers(100, 200, shape),
                           rng.integers(100, 200, shape), rng.integers(0, 10**6, 4))

    def test_merge_associative_commutative(self):
        rng = np.random.default_rng(0)
        a, b, c = (self.random_table(rng) for _ in range(3))
        assert a.merge(b).merge(c) == a.merge(b.merge(c))
        assert a.merge(b) == b.merge(a)
        assert a.merge(CountsTable.empty(AngleSettings())) == a

    def test_merge_settings_mismatch(self):
        a = CountsTable.empty(AngleSettings())
        with pytest.raises(ValueError):
            a.merge(CountsTable.empty(AngleSettings(b1=10.0)))

    def test_rejects_negative_and_shape(self):
        z = np.zeros(CountsTable.SHAPE, dtype=int)
        with pytest.raises(ValueError):
            CountsTable(AngleSettings(), z - 1, z, z, np.zeros(4))
        with pytest.raises(ValueError):
            CountsTable(AngleSettings(), np.zeros(3), z, z, np.zeros(4))

    def test_chunked_runs_merge(self):
        cfg = config(n_pulses=10_000)
        merged = simulate_run(cfg).merge(simulate_run(replace(cfg, rng_seed=99)))
        assert merged.pulses.tolist() == [20_000] * 4


def dip(x, b, v, c, w):
    return b * (1 - v * np.exp(-((x - c) ** 2) / (2 * w**2)))


class TestFitGaussian:
    def test_noiseless_round_trip(self):
        x = np.linspace(-10_000, 10_000, 41)
        truth = (5000.0, 0.9, 300.0, 1500.0)
        fit = fit_gaussian(x, dip(x, *truth))
        for got, want in zip((fit.baseline, fit.visibility, fit.center, fit.width), truth):
            assert got == pytest.approx(want, rel=1e-6)
        assert fit.depth == pytest.approx(4500.0, rel=1e-6)

    def test_poisson_noisy(self):
        rng = np.random.default_rng(96)
        x = np.linspace(-10_000, 10_000, 41)
        y = rng.poisson(dip(x, 2000.0, 0.96, 0.0, 1000.0))
        fit = fit_gaussian(x, y)
        assert abs(fit.visibility - 0.96) < 3 * fit.visibility_error
        assert 0.3 < fit.chi2_reduced < 3

    def test_constant(self):
        x = np.linspace(-5000, 5000, 21)
        fit = fit_gaussian(x, np.full(x.size, 400.0))
        assert abs(fit.visibility) <= 3 * fit.visibility_error + 1e-9
        assert fit.baseline == pytest.approx(400.0, rel=1e-6)

    @pytest.mark.parametrize("x, y", [
        (np.arange(4.0), np.ones(4)),
        (np.arange(6.0), np.array([1, 2, np.nan, 1, 1, 1.0])),
        (np.arange(6.0), np.zeros(6)),
        (np.zeros(6), np.ones(6)),
    ])
    def test_degenerate(self, x, y):
        with pytest.raises(FitError):
            fit_gaussian(x, y)


class TestHom:
    def hom_config(self, jitter, n=40_000):
        return RunConfig(n_pulses=n, source_a=IDEAL, source_b=IDEAL,
                         timing=TimingParams(sync_jitter_fs=jitter), rng_seed=3)

    @pytest.mark.parametrize("jitter", [0.0, 260.0])
    def test_exact_dip_depth(self, jitter):
        cfg = self.hom_config(jitter)
        tau = coherence_time_fs(0.4, 788.5)
        far = expected_hom_rate(cfg, 50 * tau)
        # analyzers pass H on photons 1 and 4, so both BSM photons are V;
        # two identical-polarization photons coincide with probability (1 - V)/2
        assert far == pytest.approx(1 / 8, rel=1e-9)
        assert expected_hom_rate(cfg, 0.0) / far == pytest.approx(1 - mode_overlap(0, jitter, tau, tau), abs=1e-12)

    def test_source_noise_reduces_dip(self):
        # white noise sends orthogonally polarized photons into the BSM with
        # probability (1 - v1 v2)/2; those do not interfere
        a, b = replace(IDEAL, state_visibility=0.9), replace(IDEAL, state_visibility=0.8)
        cfg = RunConfig(n_pulses=1, source_a=a, source_b=b, timing=TimingParams(sync_jitter_fs=260.0))
        tau = coherence_time_fs(0.4, 788.5)
        far = expected_hom_rate(cfg, 50 * tau)
        assert far == pytest.approx(1 / 8, rel=1e-9)
        expected = mode_overlap(0, 260.0, tau, tau) * (1 + 0.9 * 0.8) / 2
        assert 1 - expected_hom_rate(cfg, 0.0) / far == pytest.approx(expected, abs=1e-12)

    def test_counts_follow_rate(self):
        cfg = self.hom_config(260.0)
        delays = [-3000.0, 0.0, 1200.0]
        counts = hom_counts(cfg, delays)
        for d, c in zip(delays, counts):
            mu = cfg.n_pulses * expected_hom_rate(cfg, d)
            assert abs(c - mu) < 4 * math.sqrt(max(mu, 1))

    def test_zero_jitter_visibility(self):
        res = hom_scan(self.hom_config(0.0), np.linspace(-10_000, 10_000, 41))
        assert abs(res.visibility - 1.0) < 2 * res.visibility_error + 1e-3
        assert res.errors.shape == (41,)

    def test_measured_jitter_visibility(self):
        res = hom_scan(self.hom_config(260.0, n=100_000), np.linspace(-10_000, 10_000, 41))
        assert res.visibility >= 0.95
        assert 0.3 <= res.fit.chi2_reduced <= 3

    def test_flat_when_far_apart(self):
        tau = coherence_time_fs(0.4, 788.5)
        delays = 10 * tau + np.linspace(-2000, 2000, 21)
        res = hom_scan(self.hom_config(260.0), delays)
        assert abs(res.visibility) < max(3 * res.visibility_error, 0.05)

    def test_workers_identical(self):
        cfg = self.hom_config(260.0, n=20_000)
        d = np.linspace(-4000, 4000, 5)
        np.testing.assert_array_equal(hom_counts(cfg, d, workers=1), hom_counts(cfg, d, workers=3))
