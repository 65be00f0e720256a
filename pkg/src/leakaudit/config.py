"""Run configuration: one JSON document, optionally seeded from a preset.

Presets encode the canonical experiment grids; a user config overlays
preset defaults key by key. Everything an audit does is determined by
the merged document plus the seed list, which is what makes runs
replayable.
"""

from __future__ import annotations

import copy
import json
import os
from dataclasses import dataclass, field

from .design import TEMPLATE_NAMES, _template_from_json
from .dsp import BANDS
from .errors import ConfigError
from .neural import TrainConfig
from .signals import LineNoiseSpec, SurrogateSpec

KNOWN_TASKS = ("dlc", "tlc_df", "tlc_eeg", "tlc_eeg_wodo", "zero_shot", "retrieval")

#: Canonical grids, one per results-table shape.
PRESETS: dict[str, dict] = {
    "table1": {
        "templates": ["cvpr_like", "deap_like", "kul_like"],
        "tasks": ["dlc", "tlc_df", "tlc_eeg", "tlc_eeg_wodo"],
        "bands": ["full"],
        "seeds": [0, 1, 2, 3, 4],
        "signature_strength": 1.0,
    },
    "table5": {
        # cross-subject grid; cvpr_like omitted by default to keep the
        # pooled 10-subject array within desktop memory
        "templates": ["deap_like", "kul_like"],
        "tasks": [],
        "subjects_val": ["samples", "subjects"],
        "n_subjects": 10,
        "seeds": [0],
        "signature_strength": 1.0,
    },
    "bands": {
        "templates": ["cvpr_like", "deap_like", "kul_like"],
        "tasks": ["dlc", "tlc_df", "tlc_eeg", "tlc_eeg_wodo"],
        "bands": ["full", "delta", "theta", "alpha", "beta", "low_gamma", "high_gamma"],
        "seeds": [0, 1, 2, 3, 4],
        "signature_strength": 1.0,
    },
    "zeroshot": {
        "templates": ["cvpr_like"],
        "tasks": ["zero_shot"],
        "seeds": [0, 1, 2, 3, 4],
        "signature_strength": 1.0,
    },
    "retrieval": {
        "templates": ["cvpr_like"],
        "tasks": ["retrieval"],
        "seeds": [0, 1, 2, 3, 4],
        "signature_strength": 1.0,
    },
    "lrtc": {
        "wavelet": {},
        "seeds": [0],
    },
}

DEFAULT_SURROGATE = {
    "kind": "composite",
    "beta": 1.5,
    "channels": 64,
    "fs": 0.0,  # 0 = synthesize at each template's target rate
    "duration_s": 0.0,  # 0 = derive from the template
    "channel_mixing": 0.2,
    "white_weight": 0.5,
    "powerlaw_weight": 1.0,
    "line_noise": {"f0": 50.0, "amplitude": 0.5, "amplitude_drift_scale": 0.5},
}


@dataclass
class RunConfig:
    out_dir: str
    seeds: list[int]
    templates: list[str]
    tasks: list[str]
    bands: list[str]
    surrogate: SurrogateSpec
    recordings: list[str] = field(default_factory=list)
    signature_strength: float = 0.0
    signature: dict = field(default_factory=dict)
    n_subjects: int = 1
    class_map_override: dict | None = None
    class_map_seed: int = 0
    train: TrainConfig = field(default_factory=TrainConfig)
    retrieval: dict = field(default_factory=dict)
    zero_shot: dict = field(default_factory=dict)
    subjects_val: list[str] = field(default_factory=list)
    lsubjo_folds: list[int] | None = None
    max_folds: int | None = None
    figures: bool = True
    jobs: int = 1
    wavelet: dict = field(default_factory=dict)
    n_segments: int = 5
    raw: dict = field(default_factory=dict)


def _deep_merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _deep_merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def _surrogate_from_dict(obj: dict) -> SurrogateSpec:
    obj = _deep_merge(DEFAULT_SURROGATE, obj or {})
    line = obj.get("line_noise")
    line_spec = None
    if line and line.get("amplitude", 0) > 0:
        line_spec = LineNoiseSpec(
            f0=float(line.get("f0", 50.0)),
            amplitude=float(line.get("amplitude", 1.0)),
            amplitude_drift_scale=float(line.get("amplitude_drift_scale", 0.5)),
        )
    return SurrogateSpec(
        kind=obj["kind"],
        duration_s=float(obj.get("duration_s") or 1.0),
        fs=float(obj.get("fs") or 1.0),
        channels=int(obj["channels"]),
        phi=float(obj.get("phi", 0.0)),
        beta=float(obj.get("beta", 0.0)),
        channel_mixing=float(obj.get("channel_mixing", 0.0)),
        white_weight=float(obj.get("white_weight", 0.5)),
        powerlaw_weight=float(obj.get("powerlaw_weight", 1.0)),
        line_noise=line_spec,
        seed=int(obj.get("seed", 0)),
    )


def load_config(
    config_path: str | None = None,
    preset: str | None = None,
    overrides: dict | None = None,
) -> RunConfig:
    """Merge preset defaults, a config file, and CLI overrides."""
    merged: dict = {}
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}; options: {sorted(PRESETS)}")
        merged = _deep_merge(merged, PRESETS[preset])
    if config_path is not None:
        if not os.path.exists(config_path):
            raise ConfigError(f"config file not found: {config_path}")
        with open(config_path, encoding="utf-8") as fh:
            try:
                user = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{config_path}: invalid JSON: {exc}") from None
        if not isinstance(user, dict):
            raise ConfigError(f"{config_path}: config must be a JSON object")
        merged = _deep_merge(merged, user)
    if overrides:
        merged = _deep_merge(merged, overrides)
    return parse_config(merged)


def parse_config(obj: dict) -> RunConfig:
    seeds = [int(s) for s in obj.get("seeds", [0])]
    if not seeds:
        raise ConfigError("config needs a non-empty seeds list")
    templates = list(obj.get("templates", []))
    tasks = list(obj.get("tasks", []))
    subjects_val = list(obj.get("subjects_val", []))
    for t in tasks:
        if t not in KNOWN_TASKS:
            raise ConfigError(f"unknown task {t!r}; options: {KNOWN_TASKS}")
    for v in subjects_val:
        if v not in ("samples", "subjects"):
            raise ConfigError(f"subjects_val entries must be 'samples' or 'subjects', got {v!r}")
    bands = list(obj.get("bands", ["full"]))
    for b in bands:
        if b not in BANDS:
            raise ConfigError(f"unknown band {b!r}; options: {sorted(BANDS)}")
    for entry in templates:
        if isinstance(entry, dict):
            _template_from_json(entry)  # validates eagerly
        elif entry not in TEMPLATE_NAMES or entry == "custom":
            raise ConfigError(f"unknown template {entry!r}")
    recordings = [str(p) for p in obj.get("recordings", [])]
    for path in recordings:
        if not os.path.exists(path):
            raise ConfigError(f"recording does not exist: {path}")
    class_map_override = obj.get("class_map_override")
    if class_map_override is not None:
        class_map_override = {int(k): int(v) for k, v in class_map_override.items()}
    train_obj = obj.get("train", {})
    train = TrainConfig(
        lr=float(train_obj.get("lr", 1e-3)),
        weight_decay=float(train_obj.get("weight_decay", 0.01)),
        batch_size=int(train_obj.get("batch_size", 64)),
        max_epochs=int(train_obj.get("max_epochs", 50)),
        early_stop_patience=int(train_obj.get("early_stop_patience", 10)),
        seed=int(train_obj.get("seed", seeds[0])),
    )
    n_subjects = int(obj.get("n_subjects", 1))
    if recordings and "n_subjects" not in obj:
        n_subjects = len(recordings)
    return RunConfig(
        out_dir=str(obj.get("out_dir", "out")),
        seeds=seeds,
        templates=templates,
        tasks=tasks,
        bands=bands,
        surrogate=_surrogate_from_dict(obj.get("surrogate", {})),
        recordings=recordings,
        signature_strength=float(obj.get("signature_strength", 0.0)),
        signature=dict(obj.get("signature", {})),
        n_subjects=n_subjects,
        class_map_override=class_map_override,
        class_map_seed=int(obj.get("class_map_seed", 0)),
        train=train,
        retrieval=dict(obj.get("retrieval", {})),
        zero_shot=dict(obj.get("zero_shot", {})),
        subjects_val=subjects_val,
        lsubjo_folds=obj.get("lsubjo_folds"),
        max_folds=obj.get("max_folds"),
        figures=bool(obj.get("figures", True)),
        jobs=int(obj.get("jobs", 1)),
        wavelet=dict(obj.get("wavelet", {})),
        n_segments=int(obj.get("n_segments", 5)),
        raw=copy.deepcopy(obj),
    )
