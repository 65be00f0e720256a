"""Surrogate-to-dataset pipeline shared by the audit runners."""

from __future__ import annotations

from dataclasses import replace

from ..design import DesignTemplate, domain_windows, reorganize, required_duration
from ..signals import (
    MultichannelSeries,
    SurrogateSpec,
    inject_domain_signatures,
    make_domain_signatures,
    synth,
)


def subject_seed(base_seed: int, subject_id: int) -> int:
    """Stable per-subject derivation from a run seed."""
    return int(base_seed) * 1009 + int(subject_id)


def spec_for_template(spec: SurrogateSpec, template: DesignTemplate, seed: int) -> SurrogateSpec:
    """Fill in duration (template requirement plus margin) and seed.

    The surrogate is synthesized at the template's target rate unless the
    spec requests a higher one, so reorganize usually skips resampling.
    """
    fs = spec.fs if spec.fs >= template.target_fs else template.target_fs
    duration = required_duration(template) + 2.0
    n = round(duration * fs)
    duration = n / fs
    return replace(spec, fs=fs, duration_s=duration, seed=seed)


def build_dataset(
    spec: SurrogateSpec,
    template: DesignTemplate,
    subject_id: int,
    seed: int,
    signature_strength: float = 0.0,
    signature_kwargs: dict | None = None,
) -> "LabeledDataset":
    """synth -> inject domain signatures -> reorganize, all from one seed.

    The injection windows are the same domain windows reorganize lays
    out, so each domain carries exactly one signature. strength=0 skips
    injection entirely.
    """
    full_spec = spec_for_template(spec, template, seed)
    series = synth(full_spec)
    if signature_strength > 0:
        windows = domain_windows(template, seed)
        kwargs = dict(signature_kwargs or {})
        signatures = make_domain_signatures(
            n_domains=template.n_domains,
            channels=series.channel_count,
            fs=template.target_fs,
            strength=signature_strength,
            seed=seed,
            **kwargs,
        )
        series = inject_domain_signatures(series, windows, signatures)
    return reorganize(series, template, subject_id=subject_id, seed=seed)


def build_dataset_from_recording(
    series: MultichannelSeries,
    template: DesignTemplate,
    subject_id: int,
    seed: int,
) -> "LabeledDataset":
    """Reorganize a user-supplied recording (no signature injection)."""
    return reorganize(series, template, subject_id=subject_id, seed=seed)
