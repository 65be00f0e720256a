"""Raw recording file format.

A recording file is a UTF-8 key=value header terminated by a line
containing only ``---``, immediately followed by the binary payload:
row-major little-endian float32, ``channels * timepoints`` values.

Header keys: format_version=1, channels, fs, timepoints, dtype=float32le,
origin.
"""

from __future__ import annotations

import io
import os

import numpy as np

from .errors import HeaderError, PayloadLengthError, PayloadValueError, RecordingError
from .signals import MultichannelSeries

FORMAT_VERSION = 1
_PAYLOAD_DTYPE = np.dtype("<f4")


def _format_header(fields: dict) -> bytes:
    lines = [f"{k}={v}" for k, v in fields.items()]
    return ("\n".join(lines) + "\n---\n").encode("utf-8")


def _parse_header(raw: bytes, path: str) -> dict:
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise HeaderError(f"{path}: header is not valid UTF-8: {exc}") from None
    fields = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        if "=" not in line:
            raise HeaderError(f"{path}: malformed header line {line!r}")
        key, value = line.split("=", 1)
        fields[key.strip()] = value.strip()
    return fields


def save_recording(series: MultichannelSeries, path: str | os.PathLike) -> None:
    """Write *series* to *path* in the raw recording format.

    The payload is stored as little-endian float32; callers holding
    float64 data lose the extra precision on disk.
    """
    data = np.ascontiguousarray(series.data, dtype=_PAYLOAD_DTYPE)
    header = _format_header(
        {
            "format_version": FORMAT_VERSION,
            "channels": series.channel_count,
            "fs": repr(float(series.fs)),
            "timepoints": series.timepoints,
            "dtype": "float32le",
            "origin": series.origin,
        }
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(data.tobytes())


def _read_until_terminator(fh: io.BufferedReader, path: str) -> bytes:
    lines = []
    while True:
        line = fh.readline()
        if not line:
            raise HeaderError(f"{path}: header terminator '---' not found")
        if line.rstrip(b"\r\n") == b"---":
            return b"".join(lines)
        lines.append(line)
        if len(lines) > 64:
            raise HeaderError(f"{path}: header longer than 64 lines; not a recording file")


def load_recording(path: str | os.PathLike) -> MultichannelSeries:
    """Read a raw recording file back into a :class:`MultichannelSeries`.

    Loading and re-saving a file reproduces it byte for byte.
    """
    path = os.fspath(path)
    if not os.path.exists(path):
        raise RecordingError(f"recording file not found: {path}")
    with open(path, "rb") as fh:
        raw_header = _read_until_terminator(fh, path)
        fields = _parse_header(raw_header, path)
        for key in ("format_version", "channels", "fs", "timepoints", "dtype"):
            if key not in fields:
                raise HeaderError(f"{path}: header missing required key {key!r}")
        if fields["format_version"] != str(FORMAT_VERSION):
            raise HeaderError(f"{path}: unsupported format_version {fields['format_version']!r}")
        if fields["dtype"] != "float32le":
            raise HeaderError(f"{path}: unsupported dtype {fields['dtype']!r}")
        try:
            channels = int(fields["channels"])
            timepoints = int(fields["timepoints"])
            fs = float(fields["fs"])
        except ValueError as exc:
            raise HeaderError(f"{path}: non-numeric header field: {exc}") from None
        if channels < 1 or timepoints < 1 or fs <= 0:
            raise HeaderError(
                f"{path}: invalid header values channels={channels} timepoints={timepoints} fs={fs}"
            )
        payload = fh.read()
    expected = channels * timepoints * _PAYLOAD_DTYPE.itemsize
    if len(payload) != expected:
        raise PayloadLengthError(
            f"{path}: payload has {len(payload)} bytes, expected {expected} "
            f"({channels} channels x {timepoints} timepoints of float32)"
        )
    data = np.frombuffer(payload, dtype=_PAYLOAD_DTYPE).reshape(channels, timepoints)
    if not np.isfinite(data).all():
        bad = int(np.count_nonzero(~np.isfinite(data)))
        raise PayloadValueError(f"{path}: payload contains {bad} non-finite values")
    return MultichannelSeries(
        data=data.astype(np.float32), fs=fs, origin=fields.get("origin", "")
    )
