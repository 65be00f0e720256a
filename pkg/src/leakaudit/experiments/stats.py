"""Significance testing for accuracy-vs-chance and grid-wide checks."""

from __future__ import annotations

import numpy as np
from scipy import stats as sps

from ..errors import ConfigError, NumericalError


def one_sample_ttest(
    values, mu0: float, one_sided: bool = True
) -> tuple[float, float]:
    """One-sample t-test of mean(values) against mu0.

    one_sided=True tests the 'greater' alternative, the direction used
    for accuracy-above-chance checks.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.size < 2:
        raise ConfigError(f"t-test needs >= 2 values, got {values.size}")
    sd = values.std(ddof=1)
    if sd == 0:
        raise NumericalError("zero-variance sample: t statistic undefined")
    t = (values.mean() - mu0) / (sd / np.sqrt(values.size))
    df = values.size - 1
    if one_sided:
        p = float(sps.t.sf(t, df))
    else:
        p = float(2.0 * sps.t.sf(abs(t), df))
    return float(t), p


def bonferroni(p_values) -> np.ndarray:
    """Multiply each p by the family size, clipped at 1."""
    p = np.asarray(p_values, dtype=np.float64)
    _check_pvalues(p)
    return np.minimum(1.0, p * p.size)


def bh_fdr(p_values, q: float = 0.05) -> tuple[np.ndarray, np.ndarray]:
    """Benjamini-Hochberg step-up procedure.

    Returns (adjusted p-values, reject mask at level q), both in the
    input order. NaN entries are excluded from the family and never
    rejected.
    """
    if not 0 < q < 1:
        raise ConfigError(f"FDR level q must lie in (0, 1), got {q}")
    p = np.asarray(p_values, dtype=np.float64).ravel()
    valid = np.isfinite(p)
    _check_pvalues(p[valid])
    adjusted = np.full(p.shape, np.nan)
    reject = np.zeros(p.shape, dtype=bool)
    m = int(valid.sum())
    if m == 0:
        return adjusted, reject
    idx = np.flatnonzero(valid)
    order = idx[np.argsort(p[idx], kind="stable")]
    ranked = p[order] * m / np.arange(1, m + 1)
    adj = np.minimum.accumulate(ranked[::-1])[::-1]
    adjusted[order] = np.minimum(1.0, adj)
    # step-up: reject everything up to the largest i with p_(i) <= q*i/m
    under = np.flatnonzero(p[order] <= q * np.arange(1, m + 1) / m)
    if under.size:
        reject[order[: under[-1] + 1]] = True
    return adjusted, reject


def _check_pvalues(p: np.ndarray) -> None:
    if p.size and (p.min() < 0 or p.max() > 1):
        raise ConfigError("p-values must lie in [0, 1]")
