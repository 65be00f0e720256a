"""Training losses with analytic gradients.

Every loss returns (scalar batch-mean loss, dLoss/dprediction) so the
network backward pass can consume the gradient directly. Target
embeddings are treated as constants.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError, NumericalError


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def cross_entropy(logits: np.ndarray, classes) -> tuple[float, np.ndarray]:
    """Mean negative log softmax probability of the true class.

    Stabilized by max subtraction; accepts a single logit vector or a
    batch of them.
    """
    logits = np.asarray(logits, dtype=np.float64)
    single = logits.ndim == 1
    if single:
        logits = logits[None]
    classes = np.atleast_1d(np.asarray(classes, dtype=np.int64))
    n, k = logits.shape
    if classes.shape != (n,):
        raise ConfigError(f"expected {n} class labels, got shape {classes.shape}")
    if classes.min() < 0 or classes.max() >= k:
        raise ConfigError(f"class labels must lie in 0..{k - 1}")
    if not np.isfinite(logits).all():
        raise NumericalError("non-finite logits in cross_entropy")
    z = logits - logits.max(axis=1, keepdims=True)
    logsumexp = np.log(np.exp(z).sum(axis=1))
    loss = float(np.mean(logsumexp - z[np.arange(n), classes]))
    probs = softmax(logits)
    probs[np.arange(n), classes] -= 1.0
    dlogits = probs / n
    return loss, (dlogits[0] if single else dlogits)


def _row_norms(x: np.ndarray, what: str) -> np.ndarray:
    norms = np.linalg.norm(x, axis=1)
    if (norms == 0).any():
        raise NumericalError(f"zero-norm vector in {what}; cosine similarity undefined")
    return norms


def cosine_loss(pred: np.ndarray, targets: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean of (1 - cosine similarity) between predictions and targets."""
    pred = np.asarray(pred, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if pred.shape != targets.shape or pred.ndim != 2:
        raise ConfigError(f"pred/target shapes {pred.shape} vs {targets.shape} must match [n x d]")
    n = pred.shape[0]
    pn = _row_norms(pred, "cosine_loss predictions")
    tn = _row_norms(targets, "cosine_loss targets")
    cos = np.einsum("nd,nd->n", pred, targets) / (pn * tn)
    loss = float(np.mean(1.0 - cos))
    that = targets / tn[:, None]
    phat = pred / pn[:, None]
    dpred = -(that - cos[:, None] * phat) / pn[:, None] / n
    return loss, dpred


def infonce(
    pred: np.ndarray, targets: np.ndarray, temperature: float = 0.07
) -> tuple[float, np.ndarray]:
    """In-batch contrastive loss, one direction (prediction -> target).

    Row i's positive is target i; every other target in the batch is a
    negative. Similarities are cosine, scaled by 1/temperature.
    """
    if temperature <= 0:
        raise ConfigError(f"temperature must be positive, got {temperature}")
    pred = np.asarray(pred, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if pred.shape != targets.shape or pred.ndim != 2:
        raise ConfigError(f"pred/target shapes {pred.shape} vs {targets.shape} must match [n x d]")
    n = pred.shape[0]
    pn = _row_norms(pred, "infonce predictions")
    tn = _row_norms(targets, "infonce targets")
    phat = pred / pn[:, None]
    that = targets / tn[:, None]
    sims = phat @ that.T
    logits = sims / temperature
    z = logits - logits.max(axis=1, keepdims=True)
    logsumexp = np.log(np.exp(z).sum(axis=1))
    loss = float(np.mean(logsumexp - np.diag(z)))
    dlogits = softmax(logits)
    dlogits[np.arange(n), np.arange(n)] -= 1.0
    dsims = dlogits / (temperature * n)
    # d cos(p_i, t_j)/dp_i = (that_j - sims_ij * phat_i) / |p_i|
    dpred = (dsims @ that - (dsims * sims).sum(axis=1)[:, None] * phat) / pn[:, None]
    return loss, dpred


LOSSES = {"cross_entropy": cross_entropy, "cosine": cosine_loss, "infonce": infonce}
