"""Seeded mini-batch training with early stopping.

One loop serves both classifiers (cross-entropy, validation accuracy)
and embedding aligners (cosine or InfoNCE against fixed target vectors,
validation loss). Identical (config, data, seed) yields identical
parameters and history.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError, NumericalError
from .losses import LOSSES
from .network import Mlp2, Mlp2Config
from .optim import AdamWConfig, AdamWState, adamw_step


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 1e-3
    weight_decay: float = 0.01
    batch_size: int = 64
    max_epochs: int = 50
    early_stop_patience: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.lr <= 0:
            raise ConfigError(f"learning rate must be positive, got {self.lr}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.max_epochs < 1:
            raise ConfigError("max_epochs must be >= 1")


@dataclass
class TrainResult:
    params: np.ndarray
    history: list = field(default_factory=list)
    best_epoch: int = -1
    best_val_metric: float = float("-inf")


def _batched(n: int, batch_size: int):
    for start in range(0, n, batch_size):
        yield slice(start, min(start + batch_size, n))


def predict_logits(model, params: np.ndarray, x: np.ndarray, batch_size: int = 256) -> np.ndarray:
    out = []
    for sl in _batched(len(x), batch_size):
        logits, _, _ = model.forward(params, x[sl])
        out.append(logits)
    return np.concatenate(out, axis=0)


def pooled_features(model, params: np.ndarray, x: np.ndarray, batch_size: int = 256) -> np.ndarray:
    """Average-pool layer outputs, the downstream feature representation."""
    out = []
    for sl in _batched(len(x), batch_size):
        _, pooled, _ = model.forward(params, x[sl])
        out.append(pooled)
    return np.concatenate(out, axis=0)


def accuracy_pct(logits: np.ndarray, labels: np.ndarray) -> float:
    return float(np.mean(np.argmax(logits, axis=1) == labels) * 100.0)


def _eval_metric(model, params, x, targets, idx, loss_kind, batch_size) -> float:
    """Validation metric, higher is better: accuracy for classifiers,
    negative loss for embedding objectives."""
    if idx.size == 0:
        return 0.0
    logits = predict_logits(model, params, x[idx], batch_size)
    if loss_kind == "cross_entropy":
        return accuracy_pct(logits, targets[idx])
    loss, _ = LOSSES[loss_kind](logits, targets[idx])
    return -loss


def train(
    model,
    x: np.ndarray,
    targets: np.ndarray,
    split,
    loss_kind: str,
    config: TrainConfig,
) -> TrainResult:
    """Fit *model* on the split's training indices.

    x: [n, ...] sample array indexed by the split plan. targets: int
    labels for "cross_entropy", per-sample target vectors for "cosine" /
    "infonce". Tracks the validation metric each epoch and returns the
    parameters from the best epoch; stops early after
    ``early_stop_patience`` epochs without improvement.
    """
    if loss_kind not in LOSSES:
        raise ConfigError(f"unknown loss {loss_kind!r}; options: {sorted(LOSSES)}")
    train_idx = np.asarray(split.train, dtype=np.int64)
    val_idx = np.asarray(split.val, dtype=np.int64)
    if train_idx.ndim != 1:
        raise ConfigError("train() needs flat sample indices; resolve subject pairs first")
    if train_idx.size < 1:
        raise ConfigError("empty training partition")
    loss_fn = LOSSES[loss_kind]
    rng = np.random.default_rng(config.seed)
    params = model.init_params(rng)
    opt_state = AdamWState.zeros(model.n_params)
    opt_cfg = AdamWConfig(lr=config.lr, weight_decay=config.weight_decay)
    result = TrainResult(params=params.copy())
    stale = 0
    for epoch in range(config.max_epochs):
        order = rng.permutation(train_idx)
        epoch_loss = 0.0
        for sl in _batched(order.size, config.batch_size):
            batch = order[sl]
            logits, _, state = model.forward(params, x[batch], want_state=True)
            loss, dlogits = loss_fn(logits, targets[batch])
            if not np.isfinite(loss):
                raise NumericalError(f"training diverged at epoch {epoch}: loss={loss}")
            grads = model.backward(params, state, dlogits)
            params, opt_state = adamw_step(params, grads, opt_state, opt_cfg)
            epoch_loss += loss * batch.size
        epoch_loss /= order.size
        val_metric = _eval_metric(
            model, params, x, targets, val_idx, loss_kind, max(config.batch_size, 256)
        )
        result.history.append(
            {"epoch": epoch, "train_loss": epoch_loss, "val_metric": val_metric}
        )
        if val_metric > result.best_val_metric:
            result.best_val_metric = val_metric
            result.best_epoch = epoch
            result.params = params.copy()
            stale = 0
        else:
            stale += 1
            if stale >= config.early_stop_patience:
                break
    return result


def mlp2_train(
    features: np.ndarray,
    labels: np.ndarray,
    config: TrainConfig,
    split,
    hidden_units: int = 64,
) -> tuple[TrainResult, Mlp2]:
    """Train the two-layer classifier on fixed feature inputs."""
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    n_classes = int(labels.max()) + 1
    model = Mlp2(Mlp2Config(in_features=features.shape[1], n_outputs=n_classes, hidden_units=hidden_units))
    result = train(model, features, labels, split, "cross_entropy", config)
    return result, model
