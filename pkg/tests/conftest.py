import numpy as np
import pytest

from leakaudit import ChannelPolicy, DesignTemplate


def fit_loglog_slope(freqs, psd, lo, hi):
    """Least-squares slope of log10(psd) vs log10(f) over [lo, hi] Hz."""
    mask = (freqs >= lo) & (freqs <= hi) & (psd > 0)
    return np.polyfit(np.log10(freqs[mask]), np.log10(psd[mask]), 1)[0]


def sample_autocorr(x, max_lag):
    """Standard biased sample autocorrelation estimator."""
    x = np.asarray(x, dtype=np.float64)
    x = x - x.mean()
    denom = x @ x
    return np.array([(x[: x.size - k] @ x[k:]) / denom for k in range(max_lag + 1)])


@pytest.fixture
def tiny_template():
    """4 domains x 10 samples of 1 s at 32 Hz, 2 classes; small enough for
    fast training smoke tests."""
    return DesignTemplate(
        name="custom",
        n_domains=4,
        domain_duration_s=10.0,
        rest_duration_s=(2.0, 2.0),
        sample_length_s=1.0,
        target_fs=32.0,
        channel_policy=ChannelPolicy("keep_all"),
        n_classes=2,
        class_map={0: 0, 1: 1, 2: 0, 3: 1},
    )
