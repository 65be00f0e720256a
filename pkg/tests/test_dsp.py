import numpy as np
import pytest
from scipy.signal import periodogram

from leakaudit import (
    ConfigError,
    MultichannelSeries,
    NumericalError,
    acf_envelope,
    bandpass,
    get_band,
    morlet_envelope,
    resample,
)
from leakaudit.dsp import BANDS, band_available


def tone(freq, fs, seconds, channels=1, amplitude=1.0):
    t = np.arange(int(seconds * fs)) / fs
    data = amplitude * np.sin(2 * np.pi * freq * t)
    return MultichannelSeries(data=np.tile(data, (channels, 1)), fs=fs, origin="tone")


def rms(x):
    return float(np.sqrt(np.mean(np.asarray(x, dtype=np.float64) ** 2)))


class TestBands:
    def test_canonical_edges(self):
        assert (BANDS["delta"].lo, BANDS["delta"].hi) == (0.0, 4.0)
        assert (BANDS["theta"].lo, BANDS["theta"].hi) == (4.0, 8.0)
        assert (BANDS["alpha"].lo, BANDS["alpha"].hi) == (8.0, 12.0)
        assert (BANDS["beta"].lo, BANDS["beta"].hi) == (12.0, 32.0)
        assert (BANDS["low_gamma"].lo, BANDS["low_gamma"].hi) == (32.0, 45.0)
        assert (BANDS["high_gamma"].lo, BANDS["high_gamma"].hi) == (55.0, 95.0)

    def test_high_gamma_unavailable_at_128(self):
        assert not band_available(BANDS["high_gamma"], 128.0)
        assert band_available(BANDS["high_gamma"], 1000.0)

    def test_unknown_band_name(self):
        with pytest.raises(ConfigError):
            get_band("ultra")


class TestBandpass:
    def test_passband_tone_survives(self):
        series = tone(10.0, 200.0, 20.0)
        out = bandpass(series, "alpha")
        assert rms(out.data) >= 0.9 * rms(series.data)

    def test_stopband_tone_dies(self):
        series = tone(10.0, 200.0, 20.0)
        out = bandpass(series, "delta")
        assert rms(out.data) <= 0.1 * rms(series.data)

    def test_zero_in_zero_out(self):
        series = MultichannelSeries(data=np.zeros((2, 500)), fs=100.0)
        out = bandpass(series, "beta")
        assert np.allclose(out.data, 0.0)

    def test_full_band_is_identity(self):
        series = tone(7.0, 100.0, 5.0)
        out = bandpass(series, "full")
        assert np.array_equal(out.data, np.asarray(series.data, dtype=np.float64))

    def test_above_nyquist_names_band_and_fs(self):
        series = tone(10.0, 128.0, 5.0)
        with pytest.raises(ConfigError, match="high_gamma.*128"):
            bandpass(series, "high_gamma")

    def test_zero_phase_pulse(self):
        fs = 100.0
        t = np.arange(3000) / fs
        pulse = np.exp(-((t - 15.0) ** 2) / (2 * 0.5**2))
        series = MultichannelSeries(data=pulse[None, :], fs=fs)
        out = bandpass(series, "delta")
        assert abs(int(np.argmax(np.abs(out.data[0]))) - int(np.argmax(pulse))) <= 1

    def test_linearity(self):
        rng = np.random.default_rng(0)
        x = MultichannelSeries(data=rng.standard_normal((1, 2000)), fs=100.0)
        y = MultichannelSeries(data=rng.standard_normal((1, 2000)), fs=100.0)
        a, b = 2.5, -1.25
        combo = MultichannelSeries(data=a * x.data + b * y.data, fs=100.0)
        lhs = bandpass(combo, "beta").data
        rhs = a * bandpass(x, "beta").data + b * bandpass(y, "beta").data
        assert np.max(np.abs(lhs - rhs)) <= 1e-9 * max(1.0, np.max(np.abs(rhs)))


class TestResample:
    def test_length_arithmetic(self):
        rng = np.random.default_rng(1)
        series = MultichannelSeries(data=rng.standard_normal((2, 60000)), fs=1000.0)
        out = resample(series, 128.0)
        assert out.timepoints == 7680
        assert out.fs == 128.0

    def test_tone_peak_preserved(self):
        series = tone(5.0, 1000.0, 30.0)
        out = resample(series, 200.0)
        f, p = periodogram(out.data[0], fs=200.0)
        assert f[np.argmax(p)] == pytest.approx(5.0, abs=0.1)

    def test_identity_when_rate_matches(self):
        series = tone(5.0, 100.0, 3.0)
        out = resample(series, 100.0)
        assert np.array_equal(out.data, series.data)

    def test_upsampling_rejected(self):
        series = tone(5.0, 100.0, 3.0)
        with pytest.raises(ConfigError):
            resample(series, 200.0)

    def test_bandlimited_rms_preserved(self):
        # content far below 0.4*new_fs should keep its power through the chain
        fs = 1000.0
        t = np.arange(int(30 * fs)) / fs
        data = np.sin(2 * np.pi * 10.0 * t) + 0.5 * np.sin(2 * np.pi * 17.0 * t)
        series = MultichannelSeries(data=data[None, :], fs=fs)
        out = resample(series, 128.0)
        assert rms(out.data) == pytest.approx(rms(series.data), rel=0.02)


class TestMorletEnvelope:
    def test_tone_envelope_flat(self):
        fs = 200.0
        x = np.sin(2 * np.pi * 11.0 * np.arange(int(30 * fs)) / fs)
        env, edge = morlet_envelope(x, fs, 11.0)
        interior = env[edge:-edge]
        assert interior.std() / interior.mean() < 0.05

    def test_zero_signal_zero_envelope(self):
        env, _ = morlet_envelope(np.zeros(4000), 200.0, 10.0)
        assert np.allclose(env, 0.0)

    def test_am_tone_envelope_peak(self):
        fs = 200.0
        t = np.arange(int(60 * fs)) / fs
        x = (1.0 + 0.5 * np.sin(2 * np.pi * 0.5 * t)) * np.sin(2 * np.pi * 20.0 * t)
        env, edge = morlet_envelope(x, fs, 20.0)
        interior = env[edge:-edge] - env[edge:-edge].mean()
        f, p = periodogram(interior, fs=fs)
        assert f[np.argmax(p)] == pytest.approx(0.5, abs=0.05)

    def test_frequency_at_nyquist_rejected(self):
        with pytest.raises(ConfigError):
            morlet_envelope(np.zeros(100), 100.0, 50.0)


class TestAcfEnvelope:
    def test_zero_lag_is_one(self):
        rng = np.random.default_rng(0)
        env = np.abs(rng.standard_normal(5000)) + 0.1
        acf = acf_envelope(env, 100.0, [0.0])
        assert acf[0] == 1.0

    def test_white_envelope_uncorrelated_at_long_lag(self):
        fs = 200.0
        vals = []
        for seed in range(10):
            rng = np.random.default_rng(seed)
            x = rng.standard_normal(int(60 * fs))
            env, edge = morlet_envelope(x, fs, 20.0)
            vals.append(acf_envelope(env, fs, [10.0], edge=edge)[0])
        assert abs(np.mean(vals)) < 0.05

    def test_matches_brute_force_pearson(self):
        fs = 100.0
        rng = np.random.default_rng(3)
        # slow AR(1) modulation on top of a tone gives a structured envelope
        from scipy.signal import lfilter

        mod = lfilter([1.0], [1.0, -0.995], rng.standard_normal(int(120 * fs)))
        mod = 1.0 + 0.4 * mod / mod.std()
        x = mod * np.sin(2 * np.pi * 15.0 * np.arange(int(120 * fs)) / fs)
        env, edge = morlet_envelope(x, fs, 15.0)
        lags = [0.5, 2.0, 7.5, 20.0]
        acf = acf_envelope(env, fs, lags, edge=edge)
        trimmed = env[edge:-edge]
        for value, lag in zip(acf, lags):
            k = int(round(lag * fs))
            brute = np.corrcoef(trimmed[: trimmed.size - k], trimmed[k:])[0, 1]
            assert value == pytest.approx(brute, abs=1e-10)
            assert value == pytest.approx(brute, abs=0.05)

    def test_sign_flip_invariance(self):
        rng = np.random.default_rng(5)
        env = np.abs(rng.standard_normal(3000)) + 0.5
        flipped = 2 * env.mean() - env
        lags = [0.1, 1.0, 5.0]
        a = acf_envelope(env, 100.0, lags)
        b = acf_envelope(flipped, 100.0, lags)
        assert np.allclose(a, b, atol=1e-12)

    def test_constant_envelope_rejected(self):
        with pytest.raises(NumericalError):
            acf_envelope(np.ones(1000), 100.0, [1.0])

    def test_too_short_for_lag(self):
        with pytest.raises(ConfigError):
            acf_envelope(np.abs(np.random.default_rng(0).standard_normal(50)), 100.0, [1.0])
