"""Surrogate multichannel recordings with controllable temporal structure.

Phantom recordings stand in for real multichannel data: they carry no
stimulus-driven content, only the intrinsic autocorrelation the generator
puts there, so any decoding success on them is leakage by construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

SURROGATE_KINDS = ("white", "ar1", "powerlaw", "composite")

# Slow sinusoidal modulation rate for drifting line-noise amplitude [Hz].
LINE_DRIFT_FREQ = 0.01


@dataclass
class MultichannelSeries:
    """A sampled multichannel time series.

    data : array [channels x timepoints], arbitrary units
    fs : sampling rate in Hz
    origin : free-text provenance tag
    """

    data: np.ndarray
    fs: float
    origin: str = ""

    def __post_init__(self):
        self.data = np.atleast_2d(np.asarray(self.data))
        if self.data.ndim != 2:
            raise ConfigError(f"series data must be 2-D, got shape {self.data.shape}")
        if self.data.shape[0] < 1 or self.data.shape[1] < 1:
            raise ConfigError(f"series needs >=1 channel and >=1 timepoint, got {self.data.shape}")
        if self.fs <= 0:
            raise ConfigError(f"sampling rate must be positive, got {self.fs}")
        if not np.isfinite(self.data).all():
            raise ConfigError("series data contains non-finite values")

    @property
    def channel_count(self) -> int:
        return self.data.shape[0]

    @property
    def timepoints(self) -> int:
        return self.data.shape[1]

    @property
    def duration_s(self) -> float:
        return self.data.shape[1] / self.fs

    def copy(self, origin: str | None = None) -> "MultichannelSeries":
        return MultichannelSeries(
            data=self.data.copy(),
            fs=self.fs,
            origin=self.origin if origin is None else origin,
        )


@dataclass(frozen=True)
class LineNoiseSpec:
    """Mains-style sinusoid with slowly drifting amplitude.

    The amplitude is modulated by a 0.01 Hz sinusoid of relative depth
    ``amplitude_drift_scale``, so the interference envelope wanders on a
    scale of minutes.
    """

    f0: float = 50.0
    amplitude: float = 1.0
    amplitude_drift_scale: float = 0.5

    def validate(self, fs: float) -> None:
        if self.f0 <= 0 or self.f0 >= fs / 2:
            raise ConfigError(f"line-noise f0={self.f0} Hz must lie in (0, fs/2={fs / 2})")
        if self.amplitude < 0:
            raise ConfigError("line-noise amplitude must be >= 0")
        if not 0 <= self.amplitude_drift_scale <= 1:
            raise ConfigError("amplitude_drift_scale must lie in [0, 1]")


@dataclass(frozen=True)
class SurrogateSpec:
    """Recipe for a synthetic phantom recording.

    kind : one of {"white", "ar1", "powerlaw", "composite"}
    phi : AR(1) coefficient, used when kind="ar1" (|phi| < 1)
    beta : power-law spectral exponent, used by "powerlaw"/"composite"
    channel_mixing : weight m of a shared across-channel component;
        each channel is sqrt(1-m)*independent + sqrt(m)*shared, which
        keeps per-channel variance at 1 for any m.
    white_weight, powerlaw_weight : component weights for kind="composite"
    line_noise : optional mains interference added after the base process
    """

    kind: str
    duration_s: float
    fs: float
    channels: int
    phi: float = 0.0
    beta: float = 0.0
    channel_mixing: float = 0.0
    white_weight: float = 0.5
    powerlaw_weight: float = 1.0
    line_noise: LineNoiseSpec | None = None
    seed: int = 0

    def validate(self) -> int:
        """Check all invariants; return the series length in samples."""
        if self.kind not in SURROGATE_KINDS:
            raise ConfigError(f"unknown surrogate kind {self.kind!r}, expected one of {SURROGATE_KINDS}")
        if self.fs <= 0:
            raise ConfigError(f"fs must be positive, got {self.fs}")
        if self.channels < 1:
            raise ConfigError(f"channels must be >= 1, got {self.channels}")
        if self.duration_s <= 0:
            raise ConfigError(f"duration_s must be positive, got {self.duration_s}")
        n_float = self.duration_s * self.fs
        n = int(round(n_float))
        if abs(n_float - n) > 1e-6 or n < 2:
            raise ConfigError(
                f"duration_s*fs must be an integer number of samples >= 2, got {n_float}"
            )
        if not abs(self.phi) < 1:
            raise ConfigError(f"AR(1) coefficient must satisfy |phi| < 1, got {self.phi}")
        if self.beta < 0:
            raise ConfigError(f"power-law exponent beta must be >= 0, got {self.beta}")
        if not 0 <= self.channel_mixing <= 1:
            raise ConfigError(f"channel_mixing must lie in [0, 1], got {self.channel_mixing}")
        if self.kind == "composite" and (self.white_weight < 0 or self.powerlaw_weight < 0):
            raise ConfigError("composite weights must be >= 0")
        if self.line_noise is not None:
            self.line_noise.validate(self.fs)
        return n


@dataclass(frozen=True)
class DomainSignature:
    """Controllable stand-in for one domain's latent factor.

    Applied inside one time window as
    ``out = in * (1 + strength*gain) + strength*offset + strength*narrowband``.
    strength=0 leaves the signal untouched.
    """

    domain_id: int
    gain_vector: np.ndarray
    offset_vector: np.ndarray
    narrowband_freq: float
    narrowband_amplitude: float
    narrowband_phase: float = 0.0
    strength: float = 1.0

    def validate(self, channels: int, fs: float) -> None:
        if len(self.gain_vector) != channels or len(self.offset_vector) != channels:
            raise ConfigError(
                f"signature for domain {self.domain_id}: gain/offset vectors must have "
                f"{channels} entries"
            )
        if not 0 <= self.strength <= 1:
            raise ConfigError(f"signature strength must lie in [0, 1], got {self.strength}")
        if self.narrowband_amplitude != 0 and not 0 < self.narrowband_freq < fs / 2:
            raise ConfigError(
                f"narrowband frequency {self.narrowband_freq} Hz outside (0, fs/2={fs / 2})"
            )


def _powerlaw_channel(rng: np.random.Generator, n: int, fs: float, beta: float) -> np.ndarray:
    """One channel of 1/f^beta noise via spectral shaping.

    Amplitude spectrum proportional to f^(-beta/2) with independent
    uniform phases; the DC bin is zeroed; output is normalized to unit
    variance.
    """
    freqs = np.fft.rfftfreq(n, d=1.0 / fs)
    amp = np.zeros_like(freqs)
    amp[1:] = freqs[1:] ** (-beta / 2.0)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=freqs.size)
    phases[0] = 0.0
    if n % 2 == 0:
        phases[-1] = 0.0  # Nyquist bin must stay real
    spectrum = amp * np.exp(1j * phases)
    x = np.fft.irfft(spectrum, n=n)
    x -= x.mean()
    sd = x.std()
    if sd > 0:
        x /= sd
    return x


def _ar1_channel(rng: np.random.Generator, n: int, phi: float) -> np.ndarray:
    """Stationary AR(1): x_t = phi*x_{t-1} + eps_t, unit-variance innovations."""
    from scipy.signal import lfilter

    eps = rng.standard_normal(n)
    x = lfilter([1.0], [1.0, -phi], eps)
    # stationary start instead of a zero transient
    if abs(phi) > 0:
        x0 = rng.standard_normal() / np.sqrt(1.0 - phi * phi)
        x += x0 * phi ** np.arange(1, n + 1)
    return x


def _base_channel(rng: np.random.Generator, spec: SurrogateSpec, n: int) -> np.ndarray:
    if spec.kind == "white":
        return rng.standard_normal(n)
    if spec.kind == "ar1":
        return _ar1_channel(rng, n, spec.phi)
    if spec.kind == "powerlaw":
        return _powerlaw_channel(rng, n, spec.fs, spec.beta)
    # composite: weighted sum of white + powerlaw (line noise added globally)
    x = spec.white_weight * rng.standard_normal(n)
    x += spec.powerlaw_weight * _powerlaw_channel(rng, n, spec.fs, spec.beta)
    return x


def synth(spec: SurrogateSpec) -> MultichannelSeries:
    """Generate a phantom recording from *spec*.

    Deterministic for a fixed spec (seed included). Channels share a
    common component with weight ``channel_mixing``; the optional line
    noise is added last, identically on every channel. Data is returned
    as float32, matching the on-disk payload precision.
    """
    n = spec.validate()
    rng = np.random.default_rng(spec.seed)
    out = np.empty((spec.channels, n), dtype=np.float32)
    m = spec.channel_mixing
    shared = _base_channel(rng, spec, n) if m > 0 else None
    for c in range(spec.channels):
        x = _base_channel(rng, spec, n)
        if shared is not None:
            x = np.sqrt(1.0 - m) * x + np.sqrt(m) * shared
        out[c] = x
    if spec.line_noise is not None and spec.line_noise.amplitude > 0:
        ln = spec.line_noise
        t = np.arange(n) / spec.fs
        phase = rng.uniform(0.0, 2.0 * np.pi)
        drift_phase = rng.uniform(0.0, 2.0 * np.pi)
        envelope = ln.amplitude * (
            1.0 + ln.amplitude_drift_scale * np.sin(2.0 * np.pi * LINE_DRIFT_FREQ * t + drift_phase)
        )
        out += (envelope * np.sin(2.0 * np.pi * ln.f0 * t + phase)).astype(np.float32)
    origin = f"surrogate:{spec.kind}:seed={spec.seed}"
    return MultichannelSeries(data=out, fs=spec.fs, origin=origin)


def inject_domain_signatures(
    series: MultichannelSeries,
    windows: list[tuple[float, float]],
    signatures: list[DomainSignature],
) -> MultichannelSeries:
    """Apply one signature inside each time window; leave the rest untouched.

    Windows are (start, end) in seconds, must be disjoint and inside the
    recording. Sample i belongs to a window when start <= i/fs < end.
    """
    if len(windows) != len(signatures):
        raise ConfigError(
            f"got {len(windows)} windows but {len(signatures)} signatures; counts must match"
        )
    spans = []
    for t0, t1 in windows:
        if not 0 <= t0 < t1 <= series.duration_s + 1e-9:
            raise ConfigError(f"window ({t0}, {t1}) falls outside the 0..{series.duration_s:.3f} s recording")
        spans.append((int(round(t0 * series.fs)), int(round(t1 * series.fs))))
    order = np.argsort([s[0] for s in spans])
    for a, b in zip(order[:-1], order[1:]):
        if spans[a][1] > spans[b][0]:
            raise ConfigError(
                f"windows {windows[a]} and {windows[b]} overlap; injection windows must be disjoint"
            )
    out = series.data.astype(np.float64, copy=True)
    for (i0, i1), sig in zip(spans, signatures):
        sig.validate(series.channel_count, series.fs)
        g = float(sig.strength)
        if g == 0.0:
            continue
        gain = np.asarray(sig.gain_vector, dtype=np.float64)[:, None]
        offset = np.asarray(sig.offset_vector, dtype=np.float64)[:, None]
        seg = out[:, i0:i1]
        seg *= 1.0 + g * gain
        seg += g * offset
        if sig.narrowband_amplitude != 0.0:
            t = np.arange(i0, i1) / series.fs
            tone = sig.narrowband_amplitude * np.sin(
                2.0 * np.pi * sig.narrowband_freq * t + sig.narrowband_phase
            )
            seg += g * tone[None, :]
    return MultichannelSeries(
        data=out.astype(series.data.dtype), fs=series.fs, origin=series.origin + "+signatures"
    )


def make_domain_signatures(
    n_domains: int,
    channels: int,
    fs: float,
    strength: float,
    seed: int,
    freq_range: tuple[float, float] | None = None,
    gain_scale: float = 0.5,
    offset_scale: float = 0.5,
    narrowband_amplitude: float = 1.0,
) -> list[DomainSignature]:
    """Build one distinct signature per domain.

    Narrowband frequencies are spread evenly over ``freq_range`` (default
    6 Hz to min(45, 0.4*fs) Hz) so no two domains share a tone; gains and
    offsets are drawn independently per domain.
    """
    if freq_range is None:
        hi = min(45.0, 0.4 * fs)
        freq_range = (6.0, hi)
    lo, hi = freq_range
    if not 0 < lo < hi < fs / 2:
        raise ConfigError(f"signature freq_range {freq_range} invalid for fs={fs}")
    rng = np.random.default_rng(seed)
    if n_domains == 1:
        freqs = np.array([(lo + hi) / 2.0])
    else:
        freqs = np.linspace(lo, hi, n_domains)
    sigs = []
    for d in range(n_domains):
        sigs.append(
            DomainSignature(
                domain_id=d,
                gain_vector=rng.uniform(-gain_scale, gain_scale, size=channels),
                offset_vector=rng.normal(0.0, offset_scale, size=channels),
                narrowband_freq=float(freqs[d]),
                narrowband_amplitude=narrowband_amplitude,
                narrowband_phase=float(rng.uniform(0.0, 2.0 * np.pi)),
                strength=strength,
            )
        )
    return sigs
