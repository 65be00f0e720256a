"""Block-design reorganization of continuous recordings.

A continuous recording is laid out as consecutive same-label blocks
("domains") separated by rest gaps, then sliced into fixed-length
labeled samples. Three canonical templates mirror widely used block
designs; custom templates cover everything else.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from . import dsp
from .errors import ConfigError
from .recordings import load_recording, save_recording
from .signals import MultichannelSeries

TEMPLATE_NAMES = ("cvpr_like", "deap_like", "kul_like", "custom")


@dataclass(frozen=True)
class ChannelPolicy:
    """How recording channels map to sample channels.

    kind: "keep_all", "first_k" (take channels 0..n-1), or
    "replicate_to" (concatenate the channel block after itself until n
    channels are reached; n must be a multiple of the source count).
    """

    kind: str = "keep_all"
    n: int | None = None

    def __post_init__(self):
        if self.kind not in ("keep_all", "first_k", "replicate_to"):
            raise ConfigError(f"unknown channel policy {self.kind!r}")
        if self.kind != "keep_all" and (self.n is None or self.n < 1):
            raise ConfigError(f"channel policy {self.kind!r} needs a positive channel count")

    def apply(self, data: np.ndarray) -> np.ndarray:
        channels = data.shape[0]
        if self.kind == "keep_all":
            return data
        if self.kind == "first_k":
            if self.n > channels:
                raise ConfigError(f"first_k({self.n}) but recording has only {channels} channels")
            return data[: self.n]
        if self.n % channels != 0:
            raise ConfigError(
                f"replicate_to({self.n}) requires a multiple of the {channels} source channels"
            )
        return np.tile(data, (self.n // channels, 1))

    @staticmethod
    def parse(text: str) -> "ChannelPolicy":
        text = text.strip()
        if text == "keep_all":
            return ChannelPolicy("keep_all")
        for kind in ("first_k", "replicate_to"):
            if text.startswith(kind + "(") and text.endswith(")"):
                return ChannelPolicy(kind, int(text[len(kind) + 1 : -1]))
        raise ConfigError(f"cannot parse channel policy {text!r}")

    def __str__(self) -> str:
        return self.kind if self.kind == "keep_all" else f"{self.kind}({self.n})"


@dataclass(frozen=True)
class DesignTemplate:
    """Timing and labeling recipe for one block-design experiment."""

    name: str
    n_domains: int
    domain_duration_s: float
    rest_duration_s: tuple[float, float]  # (lo, hi); fixed rest has lo == hi
    sample_length_s: float
    target_fs: float
    channel_policy: ChannelPolicy
    n_classes: int
    class_map: dict[int, int] = field(hash=False)

    def __post_init__(self):
        if self.name not in TEMPLATE_NAMES:
            raise ConfigError(f"unknown template name {self.name!r}")
        if self.n_domains < 1 or self.n_classes < 1:
            raise ConfigError("n_domains and n_classes must be >= 1")
        lo, hi = self.rest_duration_s
        if lo < 0 or hi < lo:
            raise ConfigError(f"rest range ({lo}, {hi}) must satisfy 0 <= lo <= hi")
        if self.sample_length_s <= 0 or self.domain_duration_s <= 0 or self.target_fs <= 0:
            raise ConfigError("durations and target_fs must be positive")
        ratio = self.domain_duration_s / self.sample_length_s
        if abs(ratio - round(ratio)) > 1e-9:
            raise ConfigError(
                f"domain_duration_s={self.domain_duration_s} must be an integer multiple of "
                f"sample_length_s={self.sample_length_s}"
            )
        n_tp = self.sample_length_s * self.target_fs
        if abs(n_tp - round(n_tp)) > 1e-9 or round(n_tp) < 1:
            raise ConfigError(
                f"sample_length_s*target_fs must be a positive integer, got {n_tp}"
            )
        if sorted(self.class_map) != list(range(self.n_domains)):
            raise ConfigError("class_map must cover every domain id 0..n_domains-1")
        image = set(self.class_map.values())
        if image != set(range(self.n_classes)):
            raise ConfigError(
                f"class_map image {sorted(image)} must be exactly 0..{self.n_classes - 1}"
            )

    @property
    def samples_per_domain(self) -> int:
        return int(round(self.domain_duration_s / self.sample_length_s))

    @property
    def sample_timepoints(self) -> int:
        return int(round(self.sample_length_s * self.target_fs))

    @property
    def rest_max(self) -> float:
        return self.rest_duration_s[1]


def default_class_map(template_kind: str, n_domains: int, seed: int = 0) -> dict[int, int]:
    """Default domain -> class assignment for a template kind.

    cvpr_like: identity (every domain is its own class). deap_like:
    seeded balanced assignment of the domains to 4 classes. kul_like:
    alternating two classes. Custom templates must supply their own map.
    """
    if template_kind == "cvpr_like":
        return {d: d for d in range(n_domains)}
    if template_kind == "deap_like":
        if n_domains % 4 != 0:
            raise ConfigError("deap_like default map needs n_domains divisible by 4")
        per_class = n_domains // 4
        rng = np.random.default_rng(seed)
        order = rng.permutation(n_domains)
        return {int(d): int(i // per_class) for i, d in enumerate(order)}
    if template_kind == "kul_like":
        return {d: d % 2 for d in range(n_domains)}
    raise ConfigError("custom templates require an explicit class_map")


def template_by_name(
    name: str, seed: int = 0, class_map: dict[int, int] | None = None
) -> DesignTemplate:
    """Build one of the three canonical templates.

    cvpr_like: 40 blocks of 25 s (50 samples of 0.5 s), 10 s rests,
    1000 Hz, channels replicated to 128, one class per block.
    deap_like: 40 blocks of 60 s (2 s samples), 40 s rests, 128 Hz,
    first 32 channels, 4 classes.
    kul_like: 8 blocks of 6 min (1 s samples), 60-120 s rests, 128 Hz,
    all channels, 2 classes.
    """
    if name == "cvpr_like":
        spec = dict(
            n_domains=40, domain_duration_s=25.0, rest_duration_s=(10.0, 10.0),
            sample_length_s=0.5, target_fs=1000.0,
            channel_policy=ChannelPolicy("replicate_to", 128), n_classes=40,
        )
    elif name == "deap_like":
        spec = dict(
            n_domains=40, domain_duration_s=60.0, rest_duration_s=(40.0, 40.0),
            sample_length_s=2.0, target_fs=128.0,
            channel_policy=ChannelPolicy("first_k", 32), n_classes=4,
        )
    elif name == "kul_like":
        spec = dict(
            n_domains=8, domain_duration_s=360.0, rest_duration_s=(60.0, 120.0),
            sample_length_s=1.0, target_fs=128.0,
            channel_policy=ChannelPolicy("keep_all"), n_classes=2,
        )
    else:
        raise ConfigError(f"no canonical template named {name!r}; build a custom DesignTemplate")
    if class_map is None:
        class_map = default_class_map(name, spec["n_domains"], seed)
    return DesignTemplate(name=name, class_map=class_map, **spec)


def required_duration(template: DesignTemplate) -> float:
    """Minimum recording length: all domains plus worst-case rest gaps."""
    return (
        template.n_domains * template.domain_duration_s
        + (template.n_domains - 1) * template.rest_max
    )


def domain_windows(template: DesignTemplate, seed: int) -> list[tuple[float, float]]:
    """Start/end times of every domain, with rest gaps drawn from *seed*.

    Range rests are drawn uniformly per gap; fixed rests consume no
    randomness, so fixed-rest layouts are seed-independent.
    """
    rng = np.random.default_rng(seed)
    lo, hi = template.rest_duration_s
    windows = []
    t = 0.0
    for d in range(template.n_domains):
        windows.append((t, t + template.domain_duration_s))
        t += template.domain_duration_s
        if d < template.n_domains - 1:
            t += lo if hi == lo else float(rng.uniform(lo, hi))
    return windows


@dataclass
class Sample:
    """One fixed-length labeled slice of a recording."""

    subject_id: int
    domain_id: int
    class_id: int
    t_start: float
    data: np.ndarray


@dataclass
class LabeledDataset:
    """All samples cut from one subject's recording under one template."""

    samples: list[Sample]
    template: DesignTemplate
    subject_id: int
    provenance: str = ""

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def domain_ids(self) -> np.ndarray:
        return np.array([s.domain_id for s in self.samples], dtype=np.int64)

    @property
    def class_ids(self) -> np.ndarray:
        return np.array([s.class_id for s in self.samples], dtype=np.int64)

    @property
    def t_starts(self) -> np.ndarray:
        return np.array([s.t_start for s in self.samples], dtype=np.float64)

    def stack(self) -> np.ndarray:
        """All sample matrices as one [n, channels, timepoints] array."""
        return np.stack([s.data for s in self.samples])

    def domains_in_time_order(self) -> list[int]:
        """Domain ids sorted by first appearance in the recording."""
        seen: dict[int, float] = {}
        for s in self.samples:
            if s.domain_id not in seen:
                seen[s.domain_id] = s.t_start
        return sorted(seen, key=seen.get)


def reorganize(
    series: MultichannelSeries,
    template: DesignTemplate,
    subject_id: int = 0,
    seed: int = 0,
) -> LabeledDataset:
    """Cut *series* into a labeled block-design dataset.

    Resamples to the template's target rate when needed, applies the
    channel policy, lays out domains with (possibly seeded) rest gaps,
    and slices each domain into contiguous non-overlapping samples.
    Rest-gap data never enters a sample. Sample data is stored float32.
    """
    need = required_duration(template)
    have = series.duration_s
    if have + 1e-9 < need:
        raise ConfigError(
            f"recording too short for template {template.name!r}: has {have:.3f} s, "
            f"needs {need:.3f} s (short by {need - have:.3f} s)"
        )
    if series.fs < template.target_fs:
        raise ConfigError(
            f"recording rate {series.fs} Hz below template target {template.target_fs} Hz"
        )
    work = series if series.fs == template.target_fs else dsp.resample(series, template.target_fs)
    data = template.channel_policy.apply(work.data)
    fs = template.target_fs
    n_tp = template.sample_timepoints
    windows = domain_windows(template, seed)
    samples = []
    for d, (t0, _) in enumerate(windows):
        class_id = template.class_map[d]
        for j in range(template.samples_per_domain):
            t_start = t0 + j * template.sample_length_s
            i0 = int(round(t_start * fs))
            seg = data[:, i0 : i0 + n_tp]
            if seg.shape[1] != n_tp:
                raise ConfigError(
                    f"domain {d} sample {j} runs past the recording end; "
                    "recording shorter than the drawn layout"
                )
            samples.append(
                Sample(
                    subject_id=subject_id,
                    domain_id=d,
                    class_id=class_id,
                    t_start=t_start,
                    data=np.ascontiguousarray(seg, dtype=np.float32),
                )
            )
    return LabeledDataset(
        samples=samples, template=template, subject_id=subject_id, provenance=series.origin
    )


def _template_to_json(t: DesignTemplate) -> dict:
    return {
        "name": t.name,
        "n_domains": t.n_domains,
        "domain_duration_s": t.domain_duration_s,
        "rest_duration_s": list(t.rest_duration_s),
        "sample_length_s": t.sample_length_s,
        "target_fs": t.target_fs,
        "channel_policy": str(t.channel_policy),
        "n_classes": t.n_classes,
        "class_map": {str(k): v for k, v in t.class_map.items()},
    }


def _template_from_json(obj: dict) -> DesignTemplate:
    return DesignTemplate(
        name=obj["name"],
        n_domains=obj["n_domains"],
        domain_duration_s=obj["domain_duration_s"],
        rest_duration_s=tuple(obj["rest_duration_s"]),
        sample_length_s=obj["sample_length_s"],
        target_fs=obj["target_fs"],
        channel_policy=ChannelPolicy.parse(obj["channel_policy"]),
        n_classes=obj["n_classes"],
        class_map={int(k): int(v) for k, v in obj["class_map"].items()},
    )


def save_dataset(dataset: LabeledDataset, directory: str | os.PathLike) -> None:
    """Serialize to a directory: manifest.json plus one concatenated
    payload recording (sample offsets live in the manifest)."""
    os.makedirs(directory, exist_ok=True)
    n_tp = dataset.template.sample_timepoints
    index = []
    for i, s in enumerate(dataset.samples):
        index.append(
            {
                "i": i,
                "t_start": s.t_start,
                "domain": s.domain_id,
                "class": s.class_id,
                "offset": i * n_tp,
            }
        )
    manifest = {
        "template": _template_to_json(dataset.template),
        "subject_id": dataset.subject_id,
        "provenance": dataset.provenance,
        "sample_timepoints": n_tp,
        "samples": index,
    }
    with open(os.path.join(directory, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
    payload = np.concatenate([s.data for s in dataset.samples], axis=1)
    series = MultichannelSeries(
        data=payload, fs=dataset.template.target_fs, origin=dataset.provenance
    )
    save_recording(series, os.path.join(directory, "samples.rec"))


def load_dataset(directory: str | os.PathLike) -> LabeledDataset:
    manifest_path = os.path.join(directory, "manifest.json")
    if not os.path.exists(manifest_path):
        raise ConfigError(f"no dataset manifest at {manifest_path}")
    with open(manifest_path, encoding="utf-8") as fh:
        manifest = json.load(fh)
    template = _template_from_json(manifest["template"])
    payload = load_recording(os.path.join(directory, "samples.rec"))
    n_tp = manifest["sample_timepoints"]
    samples = []
    for entry in manifest["samples"]:
        off = entry["offset"]
        samples.append(
            Sample(
                subject_id=manifest["subject_id"],
                domain_id=entry["domain"],
                class_id=entry["class"],
                t_start=entry["t_start"],
                data=payload.data[:, off : off + n_tp].copy(),
            )
        )
    return LabeledDataset(
        samples=samples,
        template=template,
        subject_id=manifest["subject_id"],
        provenance=manifest["provenance"],
    )
