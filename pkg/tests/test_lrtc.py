import numpy as np
import pytest
from scipy.signal import lfilter

from leakaudit import ConfigError, MultichannelSeries
from leakaudit.lrtc import (
    AcfMatrix,
    WaveletSpec,
    default_freqs,
    default_lags,
    lrtc_map,
    lrtc_significance,
    save_acf_csvs,
)


def slow_modulated_tone(carrier_hz, fs, seconds, channels, seed, phi=0.999):
    """Tone whose amplitude follows a slow AR(1): long-lived envelope memory."""
    rng = np.random.default_rng(seed)
    n = int(seconds * fs)
    data = np.empty((channels, n))
    t = np.arange(n) / fs
    for c in range(channels):
        mod = lfilter([1.0], [1.0, -phi], rng.standard_normal(n))
        mod = 1.0 + 0.5 * mod / mod.std()
        data[c] = mod * np.sin(2 * np.pi * carrier_hz * t + rng.uniform(0, 2 * np.pi))
        data[c] += 0.1 * rng.standard_normal(n)
    return MultichannelSeries(data=data, fs=fs, origin="am-tone")


def white_series(fs, seconds, channels, seed):
    rng = np.random.default_rng(seed)
    return MultichannelSeries(
        data=rng.standard_normal((channels, int(seconds * fs))), fs=fs, origin="white"
    )


SMALL_SPEC = WaveletSpec(
    freqs=(2.0, 6.0, 10.0, 14.0, 30.0),
    lags_s=tuple(np.logspace(np.log10(0.5), np.log10(20.0), 12)),
    analysis_fs=200.0,
)


class TestWaveletSpec:
    def test_defaults_shape(self):
        spec = WaveletSpec()
        assert len(spec.freqs) == 95
        assert len(spec.lags_s) == 200
        assert spec.freqs[0] == 1.0 and spec.freqs[-1] == 95.0
        assert spec.lags_s[0] == pytest.approx(0.5)
        assert spec.lags_s[-1] == pytest.approx(500.0)
        assert spec.analysis_fs == 200.0
        assert spec.n_cycles == 7.0

    def test_default_lags_have_no_rounding_collisions(self):
        samples = np.round(np.asarray(default_lags()) * 200.0)
        assert np.unique(samples).size == 200

    def test_freq_above_nyquist_rejected(self):
        with pytest.raises(ConfigError):
            WaveletSpec(freqs=(150.0,), analysis_fs=200.0)

    def test_unsorted_lags_rejected(self):
        with pytest.raises(ConfigError):
            WaveletSpec(lags_s=(2.0, 1.0))


class TestLrtcMap:
    def test_modulated_row_decays(self):
        series = slow_modulated_tone(10.0, 200.0, 220.0, channels=2, seed=0)
        matrix = lrtc_map({0: [series]}, SMALL_SPEC, n_segments=5)
        row = matrix.values[list(SMALL_SPEC.freqs).index(10.0)]
        assert row[0] > row[-1]
        assert row[0] > 0.3

    def test_white_noise_uncorrelated_at_long_lags(self):
        spec = WaveletSpec(freqs=(5.0, 10.0, 20.0, 40.0),
                           lags_s=(1.0, 10.0, 100.0), analysis_fs=200.0)
        series = white_series(200.0, 1050.0, channels=2, seed=1)
        matrix = lrtc_map({0: [series]}, spec, n_segments=5)
        long_lag = matrix.values[:, -1]
        assert np.all(np.abs(long_lag) < 0.05)

    def test_shape_law_custom_grid(self):
        spec = WaveletSpec(freqs=tuple(np.linspace(2, 20, 10)),
                           lags_s=tuple(np.linspace(0.5, 5.0, 20)), analysis_fs=100.0)
        series = white_series(100.0, 60.0, channels=3, seed=2)
        matrix = lrtc_map({0: [series]}, spec, n_segments=5)
        assert matrix.values.shape == (10, 20)
        assert matrix.n_units == 3
        assert matrix.unit_values.shape == (3, 10, 20)

    def test_grand_matrix_is_unit_mean_bitwise(self):
        series = white_series(200.0, 150.0, channels=4, seed=3)
        matrix = lrtc_map({0: [series]}, SMALL_SPEC, n_segments=3)
        assert np.array_equal(matrix.values, matrix.unit_values.mean(axis=0))

    def test_trials_used_as_segments(self):
        trials = [white_series(200.0, 45.0, channels=2, seed=s) for s in (4, 5, 6)]
        spec = WaveletSpec(freqs=(8.0, 16.0), lags_s=(0.5, 2.0, 10.0), analysis_fs=200.0)
        matrix = lrtc_map({0: trials}, spec, n_segments=5)
        assert matrix.n_units == 2

    def test_segment_too_short_names_usable_lag(self):
        series = white_series(200.0, 30.0, channels=1, seed=7)
        spec = WaveletSpec(freqs=(10.0,), lags_s=(0.5, 25.0), analysis_fs=200.0)
        with pytest.raises(ConfigError, match="usable max"):
            lrtc_map({0: [series]}, spec, n_segments=5)

    def test_low_rate_recording_rejected(self):
        series = white_series(100.0, 100.0, channels=1, seed=8)
        with pytest.raises(ConfigError, match="below"):
            lrtc_map({0: [series]}, SMALL_SPEC, n_segments=2)

    def test_resamples_higher_rate(self):
        series = white_series(400.0, 130.0, channels=1, seed=9)
        spec = WaveletSpec(freqs=(5.0, 10.0), lags_s=(0.5, 5.0), analysis_fs=200.0)
        matrix = lrtc_map({0: [series]}, spec, n_segments=5)
        assert matrix.values.shape == (2, 2)

    def test_duplicate_lags_deduplicated_with_notice(self):
        spec = WaveletSpec(freqs=(10.0,), lags_s=(0.500, 0.501, 0.502, 5.0), analysis_fs=200.0)
        series = white_series(200.0, 60.0, channels=1, seed=10)
        matrix = lrtc_map({0: [series]}, spec, n_segments=3)
        assert matrix.values.shape[1] == 2  # 0.500/0.501/0.502 all round to 100 samples
        assert any("dedup" in note for note in matrix.notes)


class TestSignificance:
    def _fake_units(self, n_units=8, nf=6, nl=10, seed=0):
        rng = np.random.default_rng(seed)
        return rng.normal(0.0, 0.02, size=(n_units, nf, nl))

    def test_zero_correlations_no_rejections(self):
        units = np.zeros((5, 4, 6))
        p, reject = lrtc_significance(units, q=0.01)
        assert not reject.any()
        assert np.isnan(p).all()  # zero variance everywhere: flagged, not fatal

    def test_injected_cluster_detected(self):
        units = self._fake_units()
        units[:, 1, :4] += 0.5  # strong positive correlations in one row, short lags
        p, reject = lrtc_significance(units, q=0.01)
        assert reject[1, :4].all()
        assert reject.sum() <= 4 + 2  # at most a couple of false cells elsewhere

    def test_attaches_to_matrix(self):
        units = self._fake_units(seed=1)
        matrix = AcfMatrix(
            values=units.mean(axis=0), freqs=np.arange(6), lags_s=np.arange(10) + 1.0,
            n_units=8, unit_values=units, unit_labels=[(0, c) for c in range(8)],
        )
        lrtc_significance(matrix, q=0.05)
        assert matrix.p_values is not None and matrix.p_values.shape == (6, 10)
        assert matrix.reject is not None

    def test_needs_two_units(self):
        with pytest.raises(ConfigError):
            lrtc_significance(np.zeros((1, 3, 3)))


class TestCsvEmission:
    def test_files_and_shapes(self, tmp_path):
        units = np.random.default_rng(0).normal(0, 0.1, size=(4, 3, 5))
        matrix = AcfMatrix(
            values=units.mean(axis=0), freqs=np.array([1.0, 2.0, 3.0]),
            lags_s=np.array([0.5, 1.0, 2.0, 4.0, 8.0]), n_units=4,
            unit_values=units, unit_labels=[(0, c) for c in range(4)],
        )
        lrtc_significance(matrix, q=0.05)
        paths = save_acf_csvs(matrix, tmp_path)
        names = {p.split("/")[-1] for p in paths}
        assert names == {"lrtc_values.csv", "lrtc_pvalues.csv", "lrtc_reject.csv", "lrtc_meta.json"}
        values = np.loadtxt(tmp_path / "lrtc_values.csv", delimiter=",", skiprows=1)
        assert values.shape == (3, 6)  # freq column + 5 lags
        assert np.allclose(values[:, 1:], matrix.values)
