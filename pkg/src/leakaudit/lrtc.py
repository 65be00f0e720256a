"""Long-range temporal correlation maps.

For every analysis frequency, the amplitude envelope is extracted with a
complex Morlet wavelet and autocorrelated at log-spaced lags; the
resulting [frequency x lag] matrix is averaged over segments per
(subject, electrode) unit and then across units. A one-sided t-test at
the unit level plus BH-FDR correction gives the significance mask.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field

import numpy as np

from .dsp import acf_envelope, morlet_envelope, resample
from .errors import ConfigError, NumericalError
from .experiments.stats import bh_fdr
from .signals import MultichannelSeries
from scipy import stats as sps


def default_freqs() -> tuple[float, ...]:
    """95 analysis frequencies, linear on 1-95 Hz."""
    return tuple(np.linspace(1.0, 95.0, 95))


def default_lags() -> tuple[float, ...]:
    """200 autocorrelation lags, log-spaced on 0.5-500 s."""
    return tuple(np.logspace(np.log10(0.5), np.log10(500.0), 200))


@dataclass(frozen=True)
class WaveletSpec:
    freqs: tuple[float, ...] = field(default_factory=default_freqs)
    n_cycles: float = 7.0
    lags_s: tuple[float, ...] = field(default_factory=default_lags)
    analysis_fs: float = 200.0

    def __post_init__(self):
        if not self.freqs or not self.lags_s:
            raise ConfigError("wavelet spec needs at least one frequency and one lag")
        if max(self.freqs) >= self.analysis_fs / 2:
            raise ConfigError(
                f"max analysis frequency {max(self.freqs)} must be below "
                f"analysis_fs/2 = {self.analysis_fs / 2}"
            )
        if min(self.freqs) <= 0:
            raise ConfigError("analysis frequencies must be positive")
        if list(self.lags_s) != sorted(self.lags_s):
            raise ConfigError("lags must be sorted ascending")
        if self.n_cycles < 3:
            raise ConfigError(f"n_cycles must be >= 3, got {self.n_cycles}")

    @classmethod
    def from_dict(cls, obj: dict) -> "WaveletSpec":
        kwargs = {}
        if "freqs" in obj:
            kwargs["freqs"] = tuple(float(f) for f in obj["freqs"])
        if "lags_s" in obj:
            kwargs["lags_s"] = tuple(float(v) for v in obj["lags_s"])
        if "n_cycles" in obj:
            kwargs["n_cycles"] = float(obj["n_cycles"])
        if "analysis_fs" in obj:
            kwargs["analysis_fs"] = float(obj["analysis_fs"])
        return cls(**kwargs)


@dataclass
class AcfMatrix:
    """Grand-average envelope autocorrelations plus per-unit values."""

    values: np.ndarray  # [freqs x lags]
    freqs: np.ndarray
    lags_s: np.ndarray
    n_units: int
    unit_values: np.ndarray  # [units x freqs x lags]
    unit_labels: list  # (subject, electrode) per unit
    p_values: np.ndarray | None = None
    reject: np.ndarray | None = None
    notes: list = field(default_factory=list)


def _dedup_lags(lags_s: np.ndarray, fs: float) -> tuple[np.ndarray, list[str]]:
    samples = np.round(np.asarray(lags_s, dtype=np.float64) * fs).astype(np.int64)
    keep = np.concatenate(([True], np.diff(samples) != 0))
    notes = []
    if not keep.all():
        dropped = int((~keep).sum())
        notes.append(
            f"deduplicated {dropped} lags that round to the same sample at fs={fs:g} Hz"
        )
    return np.asarray(lags_s, dtype=np.float64)[keep], notes


def _as_subject_map(recordings) -> dict[int, list[MultichannelSeries]]:
    if isinstance(recordings, dict):
        return {int(k): list(v) for k, v in recordings.items()}
    if isinstance(recordings, MultichannelSeries):
        return {0: [recordings]}
    out = {}
    for i, entry in enumerate(recordings):
        out[i] = list(entry) if isinstance(entry, (list, tuple)) else [entry]
    return out


def lrtc_map(
    recordings,
    spec: WaveletSpec | None = None,
    n_segments: int = 5,
) -> AcfMatrix:
    """Compute the LRTC matrix for one or more subjects.

    *recordings* maps subject id to a list of series (trials); a subject
    with a single continuous recording has it split into *n_segments*
    equal parts. Every series must be at (or resampleable down to) the
    analysis rate, and every segment must cover at least twice the
    maximum lag.
    """
    spec = spec or WaveletSpec()
    subjects = _as_subject_map(recordings)
    if not subjects:
        raise ConfigError("lrtc_map needs at least one recording")
    lags, notes = _dedup_lags(np.asarray(spec.lags_s), spec.analysis_fs)
    max_lag_samples = int(round(lags.max() * spec.analysis_fs))
    unit_rows = []
    unit_labels = []
    for subject_id in sorted(subjects):
        segments: list[np.ndarray] = []
        for series in subjects[subject_id]:
            if series.fs < spec.analysis_fs:
                raise ConfigError(
                    f"subject {subject_id}: recording at {series.fs} Hz below the "
                    f"{spec.analysis_fs} Hz analysis rate"
                )
            if series.fs > spec.analysis_fs:
                series = resample(series, spec.analysis_fs)
            data = np.asarray(series.data, dtype=np.float64)
            if len(subjects[subject_id]) == 1 and n_segments > 1:
                seg_len = data.shape[1] // n_segments
                parts = [
                    data[:, i * seg_len : (i + 1) * seg_len] for i in range(n_segments)
                ]
            else:
                parts = [data]
            segments.extend(parts)
        for seg in segments:
            if seg.shape[1] < 2 * max_lag_samples:
                usable = seg.shape[1] / (2 * spec.analysis_fs)
                raise ConfigError(
                    f"subject {subject_id}: segment of {seg.shape[1]} samples is shorter "
                    f"than twice the max lag ({2 * max_lag_samples} samples); usable max "
                    f"lag would be {usable:.1f} s"
                )
        n_channels = segments[0].shape[0]
        for c in range(n_channels):
            acc = np.zeros((len(spec.freqs), lags.size))
            for seg in segments:
                for fi, freq in enumerate(spec.freqs):
                    env, edge = morlet_envelope(seg[c], spec.analysis_fs, freq, spec.n_cycles)
                    acc[fi] += acf_envelope(env, spec.analysis_fs, lags, edge=edge)
            acc /= len(segments)
            unit_rows.append(acc)
            unit_labels.append((subject_id, c))
    unit_values = np.stack(unit_rows)
    return AcfMatrix(
        values=unit_values.mean(axis=0),
        freqs=np.asarray(spec.freqs, dtype=np.float64),
        lags_s=lags,
        n_units=unit_values.shape[0],
        unit_values=unit_values,
        unit_labels=unit_labels,
        notes=notes,
    )


def lrtc_significance(
    matrix_or_units, q: float = 0.01
) -> tuple[np.ndarray, np.ndarray]:
    """Cell-wise one-sided t-test of unit correlations against zero,
    BH-FDR corrected across the whole grid.

    Cells whose unit values have zero variance are flagged (p = NaN) and
    never rejected. When given an AcfMatrix the p-values and mask are
    attached to it.
    """
    matrix = None
    if isinstance(matrix_or_units, AcfMatrix):
        matrix = matrix_or_units
        units = matrix.unit_values
    else:
        units = np.asarray(matrix_or_units, dtype=np.float64)
    if units.ndim != 3 or units.shape[0] < 2:
        raise ConfigError("significance needs unit values shaped [units x freqs x lags], >= 2 units")
    n_units = units.shape[0]
    mean = units.mean(axis=0)
    sd = units.std(axis=0, ddof=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = mean / (sd / np.sqrt(n_units))
    p = sps.t.sf(t, df=n_units - 1)
    p[sd == 0] = np.nan
    p_adj, reject = bh_fdr(p.ravel(), q=q)
    p_adj = p_adj.reshape(p.shape)
    reject = reject.reshape(p.shape)
    if matrix is not None:
        matrix.p_values = p_adj
        matrix.reject = reject
        if np.isnan(p).any():
            matrix.notes.append(f"{int(np.isnan(p).sum())} degenerate cells flagged (zero variance)")
    return p_adj, reject


def save_acf_csvs(matrix: AcfMatrix, out_dir: str | os.PathLike, prefix: str = "lrtc") -> list[str]:
    """Write values CSV (rows = frequencies, columns = lags), a parallel
    p-value CSV when present, and a JSON sidecar with axes and counts."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []

    def write_grid(name: str, grid: np.ndarray) -> str:
        path = os.path.join(out_dir, f"{prefix}_{name}.csv")
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["freq_hz"] + [f"lag_{lag:.6g}s" for lag in matrix.lags_s])
            for f, row in zip(matrix.freqs, grid):
                writer.writerow([f"{f:.6g}"] + [repr(float(v)) for v in row])
        return path

    paths.append(write_grid("values", matrix.values))
    if matrix.p_values is not None:
        paths.append(write_grid("pvalues", matrix.p_values))
        paths.append(write_grid("reject", matrix.reject.astype(float)))
    sidecar = {
        "freqs_hz": matrix.freqs.tolist(),
        "lags_s": matrix.lags_s.tolist(),
        "n_units": matrix.n_units,
        "unit_labels": [list(u) for u in matrix.unit_labels],
        "notes": matrix.notes,
    }
    side_path = os.path.join(out_dir, f"{prefix}_meta.json")
    with open(side_path, "w", encoding="utf-8") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
    paths.append(side_path)
    return paths
