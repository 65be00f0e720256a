"""Filtering, resampling, and wavelet envelope extraction.

All filters run forward-backward (zero phase) so band audits never shift
domain features in time.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import butter, fftconvolve, filtfilt

from .errors import ConfigError, NumericalError
from .signals import MultichannelSeries

BUTTER_ORDER = 4


@dataclass(frozen=True)
class Band:
    """A named frequency band; lo == 0 means pure low-pass."""

    name: str
    lo: float
    hi: float

    def __post_init__(self):
        if not 0 <= self.lo < self.hi:
            raise ConfigError(f"band {self.name!r}: need 0 <= lo < hi, got ({self.lo}, {self.hi})")


#: Canonical audit bands. "full" is the identity (no filtering).
BANDS = {
    "full": Band("full", 0.0, float("inf")),
    "delta": Band("delta", 0.0, 4.0),
    "theta": Band("theta", 4.0, 8.0),
    "alpha": Band("alpha", 8.0, 12.0),
    "beta": Band("beta", 12.0, 32.0),
    "low_gamma": Band("low_gamma", 32.0, 45.0),
    "high_gamma": Band("high_gamma", 55.0, 95.0),
}


def get_band(name: str) -> Band:
    try:
        return BANDS[name]
    except KeyError:
        raise ConfigError(f"unknown band {name!r}; known bands: {sorted(BANDS)}") from None


def band_available(band: Band, fs: float) -> bool:
    """True when the band's upper edge clears the Nyquist limit."""
    return band.name == "full" or band.hi < fs / 2


def bandpass_array(data: np.ndarray, fs: float, band: Band) -> np.ndarray:
    """Zero-phase Butterworth band-pass along the last axis.

    A band starting at 0 Hz is realized as a low-pass at the upper edge.
    Effective order is 2*BUTTER_ORDER because of the forward-backward pass.
    """
    if band.name == "full":
        return np.asarray(data, dtype=np.float64).copy()
    if not band_available(band, fs):
        raise ConfigError(
            f"band {band.name!r} ({band.lo}-{band.hi} Hz) exceeds Nyquist for fs={fs} Hz"
        )
    nyq = fs / 2.0
    if band.lo == 0.0:
        ba = butter(BUTTER_ORDER, band.hi / nyq, btype="lowpass")
    else:
        ba = butter(BUTTER_ORDER, [band.lo / nyq, band.hi / nyq], btype="bandpass")
    return filtfilt(*ba, np.asarray(data, dtype=np.float64), axis=-1)


def bandpass(series: MultichannelSeries, band: Band | str) -> MultichannelSeries:
    """Band-pass a whole recording; length and channel count are preserved."""
    if isinstance(band, str):
        band = get_band(band)
    out = bandpass_array(series.data, series.fs, band)
    return MultichannelSeries(data=out, fs=series.fs, origin=f"{series.origin}|{band.name}")


def resample(series: MultichannelSeries, new_fs: float) -> MultichannelSeries:
    """Downsample to *new_fs*: zero-phase low-pass at 0.4*new_fs, then
    linear interpolation onto the exact new grid.

    The output length is round(timepoints * new_fs / fs). Upsampling is
    not supported. new_fs == fs returns an unmodified copy.
    """
    if new_fs > series.fs:
        raise ConfigError(
            f"resample target {new_fs} Hz exceeds source rate {series.fs} Hz; upsampling unsupported"
        )
    if new_fs <= 0:
        raise ConfigError(f"resample target must be positive, got {new_fs}")
    if new_fs == series.fs:
        return series.copy()
    ba = butter(BUTTER_ORDER, (0.4 * new_fs) / (series.fs / 2.0), btype="lowpass")
    low = filtfilt(*ba, np.asarray(series.data, dtype=np.float64), axis=-1)
    n_new = int(round(series.timepoints * new_fs / series.fs))
    t_old = np.arange(series.timepoints) / series.fs
    t_new = np.arange(n_new) / new_fs
    out = np.empty((series.channel_count, n_new), dtype=np.float64)
    for c in range(series.channel_count):
        out[c] = np.interp(t_new, t_old, low[c])
    return MultichannelSeries(data=out, fs=new_fs, origin=f"{series.origin}@{new_fs:g}Hz")


def morlet_wavelet(fs: float, freq: float, n_cycles: float = 7.0) -> np.ndarray:
    """Complex Morlet wavelet: Gaussian-windowed complex exponential.

    The Gaussian has sigma_t = n_cycles / (2*pi*freq); the support spans
    +-5 sigma. Scaled so a unit-amplitude tone at *freq* yields an
    envelope near 1.
    """
    sigma_t = n_cycles / (2.0 * np.pi * freq)
    half = int(np.ceil(5.0 * sigma_t * fs))
    t = np.arange(-half, half + 1) / fs
    w = np.exp(2j * np.pi * freq * t) * np.exp(-(t**2) / (2.0 * sigma_t**2))
    w *= 2.0 / np.abs(w).sum()
    return w


def morlet_envelope(
    x: np.ndarray, fs: float, freq: float, n_cycles: float = 7.0
) -> tuple[np.ndarray, int]:
    """Time-varying amplitude envelope of *x* at *freq*.

    Returns (envelope, edge) where *edge* is the wavelet half-length in
    samples; the first and last *edge* samples carry convolution edge
    artifacts and should be excluded from correlation analysis.
    """
    if freq >= fs / 2:
        raise ConfigError(f"analysis frequency {freq} Hz is at or above Nyquist for fs={fs}")
    if freq <= 0:
        raise ConfigError(f"analysis frequency must be positive, got {freq}")
    if n_cycles < 3:
        raise ConfigError(f"n_cycles must be >= 3, got {n_cycles}")
    x = np.asarray(x, dtype=np.float64).ravel()
    w = morlet_wavelet(fs, freq, n_cycles)
    env = np.abs(fftconvolve(x, w, mode="same"))
    edge = (len(w) - 1) // 2
    return env, edge


def acf_envelope(
    envelope: np.ndarray,
    fs: float,
    lags_s: np.ndarray | list[float],
    edge: int = 0,
) -> np.ndarray:
    """Pearson autocorrelation of an envelope at the requested lags.

    Each lag is rounded to the nearest sample; the correlation is taken
    over the overlap of the envelope with its shifted copy, after
    dropping *edge* samples at both ends.
    """
    env = np.asarray(envelope, dtype=np.float64).ravel()
    if edge > 0:
        env = env[edge:-edge] if edge * 2 < env.size else env[:0]
    lags = np.asarray(lags_s, dtype=np.float64)
    max_lag = int(round(lags.max() * fs)) if lags.size else 0
    if env.size <= max_lag + 2:
        raise ConfigError(
            f"envelope too short ({env.size} usable samples) for max lag "
            f"{max_lag} samples; need at least {max_lag + 3}"
        )
    if np.ptp(env) == 0:
        raise NumericalError("constant envelope: Pearson correlation undefined")
    out = np.empty(lags.size, dtype=np.float64)
    for i, lag_s in enumerate(lags):
        k = int(round(lag_s * fs))
        a = env[: env.size - k] if k > 0 else env
        b = env[k:]
        am = a - a.mean()
        bm = b - b.mean()
        denom = np.sqrt((am @ am) * (bm @ bm))
        if denom == 0:
            raise NumericalError(f"degenerate envelope overlap at lag {lag_s} s")
        out[i] = (am @ bm) / denom
    return out
