"""Checkpoint files for flat parameter vectors.

Same layout convention as raw recordings: a key=value header closed by
"---", then a row-major little-endian binary payload. Parameters are
stored float64 so a reloaded checkpoint reproduces the in-memory vector
exactly; the named slices of the model layout go in the header.
"""

from __future__ import annotations

import os

import numpy as np

from ..errors import HeaderError, PayloadLengthError
from .network import ParamLayout


def save_params(params: np.ndarray, layout: ParamLayout, path: str | os.PathLike) -> None:
    lines = ["format_version=1", "kind=model_params", "dtype=float64le", f"n_params={params.size}"]
    for name, sl in layout.slices.items():
        shape = "x".join(str(d) for d in layout.shapes[name])
        lines.append(f"slice_{name}={sl.start}:{sl.stop}:{shape}")
    header = ("\n".join(lines) + "\n---\n").encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(params, dtype="<f8").tobytes())


def load_params(path: str | os.PathLike) -> tuple[np.ndarray, dict[str, slice]]:
    with open(path, "rb") as fh:
        lines = []
        while True:
            line = fh.readline()
            if not line:
                raise HeaderError(f"{path}: checkpoint header terminator not found")
            if line.rstrip(b"\r\n") == b"---":
                break
            lines.append(line.decode("utf-8").rstrip("\n"))
        payload = fh.read()
    fields = dict(line.split("=", 1) for line in lines if "=" in line)
    if fields.get("kind") != "model_params" or fields.get("dtype") != "float64le":
        raise HeaderError(f"{path}: not a float64 model checkpoint")
    n = int(fields["n_params"])
    if len(payload) != n * 8:
        raise PayloadLengthError(f"{path}: payload {len(payload)} bytes, expected {n * 8}")
    params = np.frombuffer(payload, dtype="<f8").copy()
    slices = {}
    for key, value in fields.items():
        if key.startswith("slice_"):
            start, stop, _ = value.split(":")
            slices[key[len("slice_"):]] = slice(int(start), int(stop))
    return params, slices
