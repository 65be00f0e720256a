"""leakaudit: measure how temporal autocorrelation inflates decoding
accuracy under block-design labeling and within-domain data splits."""

__version__ = "0.1.0"

from .design import (
    ChannelPolicy,
    DesignTemplate,
    LabeledDataset,
    Sample,
    default_class_map,
    domain_windows,
    load_dataset,
    reorganize,
    required_duration,
    save_dataset,
    template_by_name,
)
from .dsp import BANDS, Band, acf_envelope, bandpass, get_band, morlet_envelope, resample
from .errors import (
    ConfigError,
    HeaderError,
    LeakAuditError,
    NumericalError,
    PayloadLengthError,
    PayloadValueError,
    RecordingError,
)
from .recordings import load_recording, save_recording
from .signals import (
    DomainSignature,
    LineNoiseSpec,
    MultichannelSeries,
    SurrogateSpec,
    inject_domain_signatures,
    make_domain_signatures,
    synth,
)
from .splits import (
    SplitPlan,
    leave_domains_out,
    leave_samples_out,
    leave_subjects_out,
    load_plan,
    save_plan,
    zero_shot_split,
)

__all__ = [
    "BANDS",
    "Band",
    "ChannelPolicy",
    "ConfigError",
    "DesignTemplate",
    "DomainSignature",
    "HeaderError",
    "LabeledDataset",
    "LeakAuditError",
    "LineNoiseSpec",
    "MultichannelSeries",
    "NumericalError",
    "PayloadLengthError",
    "PayloadValueError",
    "RecordingError",
    "Sample",
    "SplitPlan",
    "SurrogateSpec",
    "acf_envelope",
    "bandpass",
    "default_class_map",
    "domain_windows",
    "get_band",
    "inject_domain_signatures",
    "leave_domains_out",
    "leave_samples_out",
    "leave_subjects_out",
    "load_dataset",
    "load_plan",
    "load_recording",
    "make_domain_signatures",
    "morlet_envelope",
    "reorganize",
    "required_duration",
    "resample",
    "save_dataset",
    "save_plan",
    "save_recording",
    "synth",
    "template_by_name",
    "zero_shot_split",
]
