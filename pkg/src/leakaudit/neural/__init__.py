from .losses import cosine_loss, cross_entropy, infonce, softmax
from .network import Mlp2, Mlp2Config, SimpleCnn, SimpleCnnConfig
from .optim import AdamWConfig, AdamWState, adamw_step
from .training import (
    TrainConfig,
    TrainResult,
    accuracy_pct,
    mlp2_train,
    pooled_features,
    predict_logits,
    train,
)

__all__ = [
    "AdamWConfig",
    "AdamWState",
    "Mlp2",
    "Mlp2Config",
    "SimpleCnn",
    "SimpleCnnConfig",
    "TrainConfig",
    "TrainResult",
    "accuracy_pct",
    "adamw_step",
    "cosine_loss",
    "cross_entropy",
    "infonce",
    "mlp2_train",
    "pooled_features",
    "predict_logits",
    "softmax",
    "train",
]
