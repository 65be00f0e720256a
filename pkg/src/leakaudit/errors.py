"""Exception types shared across the toolkit.

The CLI maps these onto its stable exit codes: config errors exit 2,
recording/file errors exit 3, numerical failures exit 4.
"""


class LeakAuditError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(LeakAuditError):
    """Invalid parameters, templates, or run configuration."""


class RecordingError(LeakAuditError):
    """Problem reading or writing a raw recording file."""


class HeaderError(RecordingError):
    """Recording header is missing, malformed, or inconsistent."""


class PayloadLengthError(RecordingError):
    """Payload size disagrees with the channels/timepoints in the header."""


class PayloadValueError(RecordingError):
    """Payload contains non-finite values."""


class NumericalError(LeakAuditError):
    """A numeric computation failed (divergence, degenerate statistics)."""
