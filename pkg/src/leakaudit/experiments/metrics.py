"""Retrieval and zero-shot evaluation metrics.

Ranks are 1-based; ties resolve by candidate index (stable descending
sort), so every metric here is exactly reproducible by a brute-force
recount.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError


def rank_of_target(scores: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """1-based rank of each row's target among its candidates.

    A candidate outranks the target if its score is strictly greater, or
    equal with a lower index.
    """
    scores = np.asarray(scores, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.int64)
    n, m = scores.shape
    if targets.shape != (n,) or targets.min() < 0 or targets.max() >= m:
        raise ConfigError("targets must index one candidate per score row")
    t_scores = scores[np.arange(n), targets]
    greater = (scores > t_scores[:, None]).sum(axis=1)
    idx = np.arange(m)[None, :]
    tied_before = ((scores == t_scores[:, None]) & (idx < targets[:, None])).sum(axis=1)
    return 1 + greater + tied_before


def top_k_accuracy(scores: np.ndarray, targets: np.ndarray, k: int) -> float:
    """Percentage of rows whose target ranks within the top k."""
    if k < 1:
        raise ConfigError(f"k must be >= 1, got {k}")
    ranks = rank_of_target(scores, targets)
    return float(np.mean(ranks <= k) * 100.0)


def rank_accuracy(scores: np.ndarray, targets: np.ndarray) -> float:
    """Mean normalized rank, 100*(N-r)/(N-1): 100 = always first,
    50 = uniform guessing."""
    n_candidates = scores.shape[1]
    if n_candidates < 2:
        raise ConfigError("rank accuracy needs >= 2 candidates")
    ranks = rank_of_target(scores, targets)
    return float(np.mean((n_candidates - ranks) / (n_candidates - 1)) * 100.0)


def acc_near(
    pred_classes: np.ndarray, true_classes: np.ndarray, presentation_order: list[int]
) -> float:
    """Share of predictions landing on a temporally adjacent class.

    *presentation_order* lists class ids by presentation time; adjacency
    means the predicted class sits directly before or after the true one
    in that order.
    """
    position = {c: i for i, c in enumerate(presentation_order)}
    pred_classes = np.asarray(pred_classes)
    true_classes = np.asarray(true_classes)
    hits = 0
    for p, t in zip(pred_classes, true_classes):
        if p in position and t in position and abs(position[p] - position[t]) == 1:
            hits += 1
    return 100.0 * hits / len(pred_classes)


def acc_nth_presented(
    pred_classes: np.ndarray, presentation_order: list[int], n: int = 7
) -> float:
    """Share of predictions equal to the class presented n-th (1-based)."""
    if not 1 <= n <= len(presentation_order):
        raise ConfigError(f"n={n} outside the {len(presentation_order)}-class presentation order")
    target = presentation_order[n - 1]
    pred_classes = np.asarray(pred_classes)
    return float(np.mean(pred_classes == target) * 100.0)


def chance_pct(n_labels: int) -> float:
    """Uniform-guessing accuracy over n labels or candidates, percent."""
    if n_labels < 1:
        raise ConfigError("need at least one label")
    return 100.0 / n_labels


def binomial_se_pct(chance: float, n_trials: int) -> float:
    """Standard error of a percent accuracy under the binomial null."""
    if n_trials < 1:
        raise ConfigError("need at least one trial")
    p = chance / 100.0
    return 100.0 * float(np.sqrt(p * (1.0 - p) / n_trials))


def make_embedding_bank(n_classes: int, dim: int = 768, seed: int = 0) -> np.ndarray:
    """Seeded per-class unit vectors standing in for encoder embeddings.

    Rows are unit-norm within 1e-9 and fixed for a run by the seed.
    """
    if n_classes < 2 or dim < 1:
        raise ConfigError("embedding bank needs >= 2 classes and dim >= 1")
    rng = np.random.default_rng(seed)
    vectors = rng.standard_normal((n_classes, dim))
    vectors /= np.linalg.norm(vectors, axis=1, keepdims=True)
    return vectors
